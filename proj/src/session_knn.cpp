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

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include <fmt/core.h>

#include "sbr/error.hpp"
#include "sbr/models.hpp"

namespace sbr {

void KnnConfig::validate() const {
  if (k < 1) throw ArgumentError("knn: k must be >= 1");
  if (m < k) throw ArgumentError(fmt::format("knn: m ({}) must be >= k ({})", m, k));
  for (const auto& lambda : {lambda1, lambda2, lambda3}) {
    if (lambda && !(*lambda > 0.0 && std::isfinite(*lambda)))
      throw ArgumentError("knn: decay factors must be positive");
  }
  if (!(idf_power >= 0.0 && std::isfinite(idf_power)))
    throw ArgumentError("knn: idf_power must be >= 0");
}

SessionIndex::SessionIndex(const SessionDataset& train) {
  const auto& sessions = train.sessions();
  const std::size_t vocab = std::max(train.vocabulary().size(),
                                     train.popularity_table().size());
  offsets_.reserve(sessions.size() + 1);
  offsets_.push_back(0);
  starts_.reserve(sessions.size());
  distinct_.reserve(sessions.size());
  popularity_.assign(vocab, 0);
  std::vector<std::uint32_t> df(vocab, 0);
  std::vector<SessionRef> last_seen(vocab, 0);
  std::vector<bool> seen_any(vocab, false);

  for (std::size_t s = 0; s < sessions.size(); ++s) {
    std::uint32_t distinct = 0;
    for (const auto& c : sessions[s].events) {
      items_.push_back(c.item);
      ++popularity_[c.item];
      if (!seen_any[c.item] || last_seen[c.item] != s) {
        seen_any[c.item] = true;
        last_seen[c.item] = static_cast<SessionRef>(s);
        ++df[c.item];
        ++distinct;
      }
    }
    offsets_.push_back(items_.size());
    starts_.push_back(sessions[s].start_time);
    distinct_.push_back(distinct);
  }

  posting_offsets_.assign(vocab + 1, 0);
  for (std::size_t i = 0; i < vocab; ++i)
    posting_offsets_[i + 1] = posting_offsets_[i] + df[i];
  posting_data_.resize(posting_offsets_[vocab]);
  // Fill newest first so each list is ordered by descending recency.
  std::vector<std::size_t> cursor(posting_offsets_.begin(),
                                  posting_offsets_.end() - 1);
  std::fill(seen_any.begin(), seen_any.end(), false);
  for (std::size_t s = sessions.size(); s-- > 0;) {
    for (const auto& c : sessions[s].events) {
      if (seen_any[c.item] && last_seen[c.item] == s) continue;
      seen_any[c.item] = true;
      last_seen[c.item] = static_cast<SessionRef>(s);
      posting_data_[cursor[c.item]++] = static_cast<SessionRef>(s);
    }
  }
}

std::span<const SessionRef> SessionIndex::postings(ItemId item) const {
  if (item + 1 >= posting_offsets_.size()) return {};
  return {posting_data_.data() + posting_offsets_[item],
          posting_offsets_[item + 1] - posting_offsets_[item]};
}

namespace {

struct PrefixItem {
  ItemId item;
  std::size_t last_pos;  // 1-based
};

std::vector<PrefixItem> distinct_prefix(std::span<const ItemId> prefix) {
  std::vector<PrefixItem> out;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const PrefixItem& p) { return p.item == prefix[i]; });
    if (it == out.end()) {
      out.push_back({prefix[i], i + 1});
    } else {
      it->last_pos = i + 1;
    }
  }
  return out;
}

}  // namespace

std::vector<Neighbor> retrieve_neighbors(const SessionIndex& index,
                                         std::span<const ItemId> prefix,
                                         Timestamp query_time,
                                         const KnnConfig& config) {
  if (prefix.empty()) return {};
  const auto items = distinct_prefix(prefix);
  const double length = static_cast<double>(prefix.size());

  std::vector<double> position_weight(items.size(), 1.0);
  if (config.lambda1) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      position_weight[i] = std::exp(
          (static_cast<double>(items[i].last_pos) - length) / *config.lambda1);
    }
  }

  // k-way merge of the (descending) posting lists; a session shows up once
  // per shared item, consecutively. Its weights are summed in prefix order
  // so equal similarities come out bit-identical.
  struct Head {
    SessionRef session;
    std::size_t list;
    std::size_t pos;
    bool operator<(const Head& o) const { return session < o.session; }
  };
  std::vector<std::span<const SessionRef>> lists;
  lists.reserve(items.size());
  std::priority_queue<Head> heap;
  for (std::size_t i = 0; i < items.size(); ++i) {
    lists.push_back(index.postings(items[i].item));
    if (!lists.back().empty()) heap.push({lists.back()[0], i, 0});
  }

  struct Candidate {
    SessionRef session;
    double overlap;
  };
  std::vector<Candidate> candidates;
  std::vector<std::size_t> shared;
  const auto close = [&] {
    if (candidates.empty()) return;
    std::sort(shared.begin(), shared.end());
    for (std::size_t i : shared) candidates.back().overlap += position_weight[i];
    shared.clear();
  };
  while (!heap.empty()) {
    const Head top = heap.top();
    heap.pop();
    if (candidates.empty() || candidates.back().session != top.session) {
      close();
      if (candidates.size() == config.m) break;
      candidates.push_back({top.session, 0.0});
    }
    shared.push_back(top.list);
    if (top.pos + 1 < lists[top.list].size())
      heap.push({lists[top.list][top.pos + 1], top.list, top.pos + 1});
  }
  close();

  const double prefix_distinct = static_cast<double>(items.size());
  std::vector<Neighbor> neighbors;
  neighbors.reserve(candidates.size());
  for (const auto& c : candidates) {
    double sim = c.overlap /
                 std::sqrt(prefix_distinct *
                           static_cast<double>(index.distinct_count(c.session)));
    if (config.lambda2) {
      const double days = std::max(
          0.0, static_cast<double>(query_time - index.start_time(c.session)) /
                   static_cast<double>(kSecondsPerDay));
      sim *= std::exp(-days / *config.lambda2);
    }
    neighbors.push_back({c.session, sim});
  }

  const auto by_similarity = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.session > b.session;
  };
  if (neighbors.size() > config.k) {
    std::partial_sort(neighbors.begin(),
                      neighbors.begin() + static_cast<std::ptrdiff_t>(config.k),
                      neighbors.end(), by_similarity);
    neighbors.resize(config.k);
  } else {
    std::sort(neighbors.begin(), neighbors.end(), by_similarity);
  }
  return neighbors;
}

ScoreMap knn_score(const SessionIndex& index,
                   std::span<const Neighbor> neighbors,
                   std::span<const ItemId> prefix, const KnnConfig& config) {
  ScoreMap scores;
  if (prefix.empty()) return scores;
  const auto items = distinct_prefix(prefix);
  const ItemId last_item = prefix.back();
  std::unordered_set<ItemId> eligible;

  for (const auto& n : neighbors) {
    const auto seq = index.items(n.session);

    // Anchor: last occurrence in the neighbor of the shared item that
    // appears latest in the prefix.
    std::size_t anchor = 0;
    std::size_t best_prefix_pos = 0;
    for (std::size_t q = 0; q < seq.size(); ++q) {
      for (const auto& p : items) {
        if (p.item == seq[q] && p.last_pos >= best_prefix_pos) {
          best_prefix_pos = p.last_pos;
          anchor = q;
        }
      }
    }
    if (best_prefix_pos == 0) continue;

    for (std::size_t q = 0; q < seq.size(); ++q) {
      double w = 1.0;
      if (config.lambda3) {
        const double dist =
            static_cast<double>(q > anchor ? q - anchor : anchor - q);
        w = std::exp(-dist / *config.lambda3);
      }
      scores[seq[q]] += n.similarity * w;
    }

    if (config.sequential_filter) {
      auto first = std::find(seq.begin(), seq.end(), last_item);
      if (first != seq.end()) eligible.insert(first + 1, seq.end());
    }
  }

  if (config.sequential_filter) {
    std::erase_if(scores, [&](const auto& kv) { return !eligible.contains(kv.first); });
  }
  if (config.idf_power > 0.0) {
    const double total = static_cast<double>(index.session_count());
    for (auto& [item, score] : scores) {
      const double df = index.document_frequency(item);
      score *= std::pow(std::log(total / df), config.idf_power);
    }
  }
  return scores;
}

SessionKnn::SessionKnn(const SessionDataset& train, const KnnConfig& config)
    : config_((config.validate(), config)), index_(train) {}

ScoreMap SessionKnn::score(std::span<const ItemId> prefix,
                           Timestamp query_time) const {
  const auto neighbors = retrieve_neighbors(index_, prefix, query_time, config_);
  return knn_score(index_, neighbors, prefix, config_);
}

}  // namespace sbr
