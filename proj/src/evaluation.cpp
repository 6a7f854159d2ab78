// Copyright 2026 The sbrbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sbr/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include <fmt/core.h>

#include "sbr/error.hpp"

namespace sbr {

EventStream::EventStream(const SessionDataset& test) : test_(&test) {
  const auto& sessions = test.sessions();
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const std::size_t offset = items_.size();
    for (const auto& c : sessions[s].events) items_.push_back(c.item);
    for (std::size_t t = 1; t < sessions[s].size(); ++t)
      events_.push_back({s, offset, t});
  }
}

PredictionEvent EventStream::operator[](std::size_t i) const {
  const Ref& r = events_[i];
  const Session& session = test_->sessions()[r.session];
  return {session.session_id,
          std::span<const ItemId>(items_.data() + r.offset, r.length),
          items_[r.offset + r.length], session.events[r.length].time};
}

std::optional<std::size_t> rank_of_target(std::span<const ItemId> list,
                                          ItemId target) {
  for (std::size_t i = 0; i < list.size(); ++i) {
    for (std::size_t j = i + 1; j < list.size(); ++j) {
      if (list[i] == list[j])
        throw std::invalid_argument("rank_of_target: duplicate item in list");
    }
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] == target) return i + 1;
  }
  return std::nullopt;
}

double MetricReport::mrr(std::size_t cutoff) const {
  for (const auto& c : per_cutoff)
    if (c.cutoff == cutoff) return c.mrr;
  throw std::out_of_range(fmt::format("no metrics at cutoff {}", cutoff));
}

double MetricReport::hr(std::size_t cutoff) const {
  for (const auto& c : per_cutoff)
    if (c.cutoff == cutoff) return c.hr;
  throw std::out_of_range(fmt::format("no metrics at cutoff {}", cutoff));
}

namespace {

using Clock = std::chrono::steady_clock;

struct WorkerState {
  std::vector<bool> recommended;      // coverage, per item
  std::chrono::nanoseconds predict{0};
  std::exception_ptr error;
};

}  // namespace

EvaluationResult evaluate(const Recommender& model, const SessionDataset& test,
                          const SessionDataset& train,
                          const EvalOptions& options) {
  std::vector<std::size_t> cutoffs = options.cutoffs;
  if (cutoffs.empty()) throw ArgumentError("evaluate: no cutoffs");
  std::sort(cutoffs.begin(), cutoffs.end());
  if (cutoffs.front() < 1) throw ArgumentError("evaluate: cutoffs must be >= 1");
  const std::size_t max_k = cutoffs.back();

  const EventStream stream(test);
  const std::size_t n = stream.size();
  const auto popularity = std::span<const std::uint32_t>(train.popularity_table());
  const Vocabulary& vocabulary = train.vocabulary();

  // Per-event results; reduced in event order afterwards.
  std::vector<std::uint32_t> ranks(n, 0);  // 0: miss
  std::vector<std::uint64_t> pop_sum(n, 0);
  std::vector<std::uint32_t> slots(n, 0);

  const std::size_t workers =
      std::max<std::size_t>(1, std::min(options.threads, std::max<std::size_t>(n, 1)));
  std::vector<WorkerState> states(workers);
  const auto run = [&](std::size_t w) {
    WorkerState& st = states[w];
    st.recommended.assign(std::max(vocabulary.size(), popularity.size()), false);
    try {
      for (std::size_t i = w; i < n; i += workers) {
        const PredictionEvent ev = stream[i];
        const auto start = Clock::now();
        const ScoreMap scores = model.score(ev.prefix, ev.query_time);
        const auto list = rank_topk(scores, max_k, popularity, vocabulary);
        st.predict += Clock::now() - start;
        for (const auto& [item, score] : scores) {
          if (!std::isfinite(score))
            throw Error(ExitCode::kInputError,
                        fmt::format("model produced a non-finite score for "
                                    "session {}",
                                    ev.session_id));
        }
        if (auto r = rank_of_target(list, ev.target))
          ranks[i] = static_cast<std::uint32_t>(*r);
        std::uint64_t sum = 0;
        for (ItemId item : list) {
          if (item >= st.recommended.size()) st.recommended.resize(item + 1, false);
          st.recommended[item] = true;
          sum += item < popularity.size() ? popularity[item] : 0;
        }
        pop_sum[i] = sum;
        slots[i] = static_cast<std::uint32_t>(list.size());
      }
    } catch (...) {
      st.error = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& st : states)
    if (st.error) std::rethrow_exception(st.error);

  EvaluationResult result;
  MetricReport& m = result.metrics;
  m.event_count = n;
  m.coverage_cutoff = max_k;
  for (std::size_t k : cutoffs) {
    double rr = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (ranks[i] != 0 && ranks[i] <= k) {
        ++hits;
        rr += 1.0 / static_cast<double>(ranks[i]);
      }
    }
    m.per_cutoff.push_back(
        {k, n == 0 ? 0.0 : rr / static_cast<double>(n),
         n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n)});
  }

  std::size_t covered = 0;
  const std::size_t universe = std::max(vocabulary.size(), popularity.size());
  for (std::size_t item = 0; item < universe; ++item) {
    const bool any = std::any_of(states.begin(), states.end(), [&](const auto& st) {
      return item < st.recommended.size() && st.recommended[item];
    });
    if (any && item < popularity.size() && popularity[item] > 0) ++covered;
  }
  m.cov = train.catalog_size() == 0
              ? 0.0
              : static_cast<double>(covered) /
                    static_cast<double>(train.catalog_size());

  std::uint64_t total_pop = 0, total_slots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total_pop += pop_sum[i];
    total_slots += slots[i];
  }
  m.pop = (total_slots == 0 || train.max_popularity() == 0)
              ? 0.0
              : static_cast<double>(total_pop) /
                    (static_cast<double>(total_slots) *
                     static_cast<double>(train.max_popularity()));

  std::chrono::nanoseconds predict{0};
  for (const auto& st : states) predict += st.predict;
  result.timing.mean_predict_ms =
      n == 0 ? 0.0
             : std::chrono::duration<double, std::milli>(predict).count() /
                   static_cast<double>(n);
  return result;
}

EvaluationResult fit_and_evaluate(ModelKind kind, const ParamSet& params,
                                  const SessionDataset& train,
                                  const SessionDataset& test,
                                  std::uint64_t seed,
                                  const EvalOptions& options) {
  const auto start = Clock::now();
  const auto model = fit_model(kind, params, train, seed);
  const double minutes =
      std::chrono::duration<double, std::ratio<60>>(Clock::now() - start).count();
  EvaluationResult result = evaluate(*model, test, train, options);
  result.timing.train_time_min = minutes;
  return result;
}

}  // namespace sbr
