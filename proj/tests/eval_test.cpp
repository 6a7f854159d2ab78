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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sbr/error.hpp"
#include "synthetic.hpp"

namespace sbr {
namespace {

using testing::id;
using testing::ids;
using testing::make_dataset;

class FunctionModel final : public Recommender {
 public:
  using Fn = std::function<ScoreMap(std::span<const ItemId>, Timestamp)>;
  explicit FunctionModel(Fn fn) : fn_(std::move(fn)) {}
  ScoreMap score(std::span<const ItemId> prefix, Timestamp t) const override {
    return fn_(prefix, t);
  }

 private:
  Fn fn_;
};

// ---------------------------------------------------------------------------
// Events

TEST(EventStreamTest, RevealsOneItemAtATime) {
  const auto data = make_dataset({{"A", "B", "C"}, {"D", "E"}});
  const EventStream stream(data);
  ASSERT_EQ(stream.size(), 3u);
  const auto e0 = stream[0];
  EXPECT_EQ(e0.session_id, "s0000");
  EXPECT_EQ(std::vector<ItemId>(e0.prefix.begin(), e0.prefix.end()), ids(data, {"A"}));
  EXPECT_EQ(e0.target, id(data, "B"));
  EXPECT_EQ(e0.query_time, testing::kEpoch + 60);
  const auto e1 = stream[1];
  EXPECT_EQ(std::vector<ItemId>(e1.prefix.begin(), e1.prefix.end()),
            ids(data, {"A", "B"}));
  EXPECT_EQ(e1.target, id(data, "C"));
  EXPECT_EQ(stream[2].target, id(data, "E"));
}

TEST(EventStreamTest, CountIsClicksMinusSessions) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 20; ++round) {
    const auto data = testing::random_dataset(rng, 1 + rng() % 100, 20, 9);
    EXPECT_EQ(EventStream(data).size(), data.click_count() - data.size());
  }
}

// ---------------------------------------------------------------------------
// Ranks

TEST(RankOfTargetTest, Positions) {
  std::vector<ItemId> list(20);
  for (ItemId i = 0; i < 20; ++i) list[i] = 100 + i;
  EXPECT_EQ(rank_of_target(list, 100), 1u);
  EXPECT_EQ(rank_of_target(list, 119), 20u);
  EXPECT_FALSE(rank_of_target(list, 7));
  EXPECT_FALSE(rank_of_target(std::span<const ItemId>(list).first(19), 119));
  EXPECT_FALSE(rank_of_target({}, 1));
}

TEST(RankOfTargetTest, DuplicatesAreRejected) {
  const std::vector<ItemId> dup{1, 2, 1};
  EXPECT_THROW(rank_of_target(dup, 2), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Metrics

// Train catalog A..E with popularity A=5, B=4, C=3, D=2, E=1.
SessionDataset catalog(std::shared_ptr<Vocabulary> vocab) {
  return make_dataset({{"A", "A", "A", "A", "A", "B", "B", "B", "B"},
                       {"C", "C", "C", "D", "D", "E"}},
                      std::move(vocab));
}

TEST(EvaluateTest, HandComputedRanks) {
  auto vocab = std::make_shared<Vocabulary>();
  const auto train = catalog(vocab);
  const auto test = make_dataset({{"A", "B", "C", "D"}}, vocab);
  const ItemId A = id(train, "A"), B = id(train, "B"), C = id(train, "C"),
               E = id(train, "E");
  // Event 1 target B at rank 1; event 2 target C at rank 4; event 3 misses D.
  const FunctionModel model([&](std::span<const ItemId> prefix, Timestamp) -> ScoreMap {
    switch (prefix.size()) {
      case 1: return {{B, 1.0}};
      case 2: return {{A, 0.9}, {B, 0.8}, {E, 0.7}, {C, 0.6}};
      default: return {{A, 1.0}};
    }
  });
  const auto r = evaluate(model, test, train, {{10, 20}, 1});
  EXPECT_EQ(r.metrics.event_count, 3u);
  EXPECT_NEAR(r.metrics.hr(20), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.metrics.mrr(20), (1.0 + 0.25) / 3.0, 1e-12);
  EXPECT_NEAR(r.metrics.mrr(20), 0.4167, 1e-4);
  EXPECT_DOUBLE_EQ(r.metrics.hr(10), r.metrics.hr(20));
  // Recommended {A, B, E, C} out of five items.
  EXPECT_NEAR(r.metrics.cov, 4.0 / 5.0, 1e-12);
  // Slots: B | A B E C | A -> (4 + 5+4+1+3 + 5) / (6 * 5).
  EXPECT_NEAR(r.metrics.pop, 22.0 / 30.0, 1e-12);
  EXPECT_EQ(r.metrics.coverage_cutoff, 20u);
  EXPECT_THROW(r.metrics.mrr(5), std::out_of_range);

  const auto r1 = evaluate(model, test, train, {{1}, 1});
  EXPECT_NEAR(r1.metrics.hr(1), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(r1.metrics.mrr(1), 1.0 / 3.0, 1e-12);
}

TEST(EvaluateTest, CoverageAndPopularityExtremes) {
  auto vocab = std::make_shared<Vocabulary>();
  const auto train = catalog(vocab);
  const auto test = make_dataset({{"B", "C", "D"}, {"E", "A"}}, vocab);
  const ItemId A = id(train, "A"), B = id(train, "B");
  const FunctionModel most_popular([&](std::span<const ItemId>, Timestamp) -> ScoreMap {
    return {{A, 1.0}};
  });
  const auto r = evaluate(most_popular, test, train);
  EXPECT_DOUBLE_EQ(r.metrics.pop, 1.0);
  EXPECT_DOUBLE_EQ(r.metrics.cov, 1.0 / 5.0);

  const FunctionModel two([&](std::span<const ItemId>, Timestamp) -> ScoreMap {
    return {{A, 1.0}, {B, 0.5}};
  });
  EXPECT_DOUBLE_EQ(evaluate(two, test, train).metrics.cov, 0.4);
}

TEST(EvaluateTest, EmptyModelScoresZero) {
  auto vocab = std::make_shared<Vocabulary>();
  const auto train = catalog(vocab);
  const auto test = make_dataset({{"A", "B", "C"}}, vocab);
  const FunctionModel empty([](std::span<const ItemId>, Timestamp) { return ScoreMap{}; });
  const auto r = evaluate(empty, test, train);
  for (const auto& c : r.metrics.per_cutoff) {
    EXPECT_EQ(c.mrr, 0.0);
    EXPECT_EQ(c.hr, 0.0);
  }
  EXPECT_EQ(r.metrics.cov, 0.0);
  EXPECT_EQ(r.metrics.pop, 0.0);
}

TEST(EvaluateTest, NonFiniteScoresAreErrors) {
  auto vocab = std::make_shared<Vocabulary>();
  const auto train = catalog(vocab);
  const auto test = make_dataset({{"A", "B"}}, vocab);
  const ItemId A = id(train, "A");
  const FunctionModel bad([&](std::span<const ItemId>, Timestamp) -> ScoreMap {
    return {{A, std::numeric_limits<double>::quiet_NaN()}};
  });
  EXPECT_THROW(evaluate(bad, test, train), Error);
  EXPECT_THROW(evaluate(bad, test, train, {{10, 20}, 3}), Error);
  EXPECT_THROW(evaluate(bad, test, train, {{}, 1}), ArgumentError);
}

// A model that peeks at the target always ranks it first.
class OracleModel final : public Recommender {
 public:
  explicit OracleModel(const SessionDataset& test) {
    const EventStream stream(test);
    for (std::size_t i = 0; i < stream.size(); ++i) {
      const auto e = stream[i];
      by_prefix_.emplace(std::vector<ItemId>(e.prefix.begin(), e.prefix.end()),
                         std::make_pair(e.query_time, e.target));
    }
  }
  ScoreMap score(std::span<const ItemId> prefix, Timestamp t) const override {
    const auto range =
        by_prefix_.equal_range(std::vector<ItemId>(prefix.begin(), prefix.end()));
    for (auto it = range.first; it != range.second; ++it)
      if (it->second.first == t) return {{it->second.second, 1.0}};
    return {};
  }

 private:
  std::multimap<std::vector<ItemId>, std::pair<Timestamp, ItemId>> by_prefix_;
};

TEST(EvaluateTest, PeekingModelIsPerfect) {
  // make_dataset gives every session its own start hour, so (prefix, time)
  // identifies the event.
  std::mt19937_64 rng(5);
  auto vocab = std::make_shared<Vocabulary>();
  const auto train = catalog(vocab);
  const std::vector<std::string> names{"A", "B", "C", "D", "E"};
  std::vector<std::vector<std::string>> sessions(300);
  for (auto& s : sessions) {
    for (std::size_t j = 0, len = 2 + rng() % 6; j < len; ++j)
      s.push_back(names[rng() % names.size()]);
  }
  const auto test = make_dataset(sessions, vocab);
  const OracleModel model(test);
  const auto r = evaluate(model, test, train, {{1, 5, 20}, 1});
  for (const auto& c : r.metrics.per_cutoff) {
    EXPECT_DOUBLE_EQ(c.mrr, 1.0);
    EXPECT_DOUBLE_EQ(c.hr, 1.0);
  }
}

// Independent per-event reduction, straight from the definitions.
TEST(EvaluateTest, MatchesDirectComputation) {
  std::mt19937_64 rng(6);
  for (int round = 0; round < 10; ++round) {
    const auto data = testing::random_dataset(rng, 300, 40, 7, 20);
    const auto split = split_by_days(data, 4);
    const auto model = fit_model(ModelKind::kSr, {}, split.train, 0);
    const auto r = evaluate(*model, split.test, split.train, {{5, 20}, 1});

    const auto pop = std::span<const std::uint32_t>(split.train.popularity_table());
    double rr5 = 0, rr20 = 0, hit5 = 0, hit20 = 0, pop_sum = 0, slots = 0;
    std::set<ItemId> seen;
    std::size_t n = 0;
    for (const auto& s : split.test.sessions()) {
      const auto items = s.items();
      for (std::size_t t = 1; t < items.size(); ++t, ++n) {
        const auto list = rank_topk(
            model->score(std::span<const ItemId>(items.data(), t), s.events[t].time), 20,
            pop, split.train.vocabulary());
        const auto it = std::find(list.begin(), list.end(), items[t]);
        if (it != list.end()) {
          const double rank = static_cast<double>(it - list.begin() + 1);
          rr20 += 1.0 / rank;
          hit20 += 1;
          if (rank <= 5) {
            rr5 += 1.0 / rank;
            hit5 += 1;
          }
        }
        for (ItemId i : list) {
          seen.insert(i);
          pop_sum += pop[i];
        }
        slots += static_cast<double>(list.size());
      }
    }
    ASSERT_EQ(r.metrics.event_count, n);
    EXPECT_NEAR(r.metrics.mrr(5), rr5 / n, 1e-12);
    EXPECT_NEAR(r.metrics.mrr(20), rr20 / n, 1e-12);
    EXPECT_NEAR(r.metrics.hr(5), hit5 / n, 1e-12);
    EXPECT_NEAR(r.metrics.hr(20), hit20 / n, 1e-12);
    EXPECT_NEAR(r.metrics.cov,
                static_cast<double>(seen.size()) / split.train.catalog_size(), 1e-12);
    EXPECT_NEAR(r.metrics.pop, pop_sum / (slots * split.train.max_popularity()), 1e-12);
    EXPECT_LE(r.metrics.hr(5), r.metrics.hr(20));
    EXPECT_LE(r.metrics.mrr(20), r.metrics.hr(20));
  }
}

TEST(EvaluateTest, ThreadCountDoesNotChangeMetrics) {
  std::mt19937_64 rng(7);
  const auto data = testing::random_dataset(rng, 500, 60, 8, 30);
  const auto split = split_by_days(data, 5);
  const ParamSet params{{"k", "50"}, {"m", "200"}, {"lambda1", "2"}, {"lambda3", "1"}};
  const auto model = fit_model(ModelKind::kStan, params, split.train, 0);
  const auto one = evaluate(*model, split.test, split.train, {{10, 20}, 1});
  for (std::size_t threads : {2u, 3u, 8u}) {
    const auto many = evaluate(*model, split.test, split.train, {{10, 20}, threads});
    EXPECT_EQ(many.metrics.event_count, one.metrics.event_count);
    for (std::size_t i = 0; i < one.metrics.per_cutoff.size(); ++i) {
      EXPECT_EQ(many.metrics.per_cutoff[i].mrr, one.metrics.per_cutoff[i].mrr);
      EXPECT_EQ(many.metrics.per_cutoff[i].hr, one.metrics.per_cutoff[i].hr);
    }
    EXPECT_EQ(many.metrics.cov, one.metrics.cov);
    EXPECT_EQ(many.metrics.pop, one.metrics.pop);
  }
}

// ---------------------------------------------------------------------------
// Results files

ResultRow sample_row(std::string model, double mrr20, double pop) {
  ResultRow row;
  row.model = std::move(model);
  row.metrics.per_cutoff = {{10, mrr20 - 0.01, 0.4}, {20, mrr20, 0.5}};
  row.metrics.coverage_cutoff = 20;
  row.metrics.cov = 0.25;
  row.metrics.pop = pop;
  row.metrics.event_count = 1234;
  row.timing = {0.5, 1.25};
  row.seed = 42;
  row.config_hash = "00ff00ff00ff00ff";
  return row;
}

TEST(ResultsTest, HeaderAndRoundTrip) {
  const std::vector<std::size_t> cutoffs{10, 20};
  EXPECT_EQ(results_header(cutoffs),
            "model,mrr@10,mrr@20,hr@10,hr@20,cov@20,pop@20,t_time_min,p_time_ms,"
            "events,seed,config_hash");
  const auto row = sample_row("STAN", 0.3, 0.05);
  EXPECT_EQ(format_result_row(row),
            "STAN,0.290000,0.300000,0.400000,0.500000,0.250000,0.050000,0.500000,"
            "1.250000,1234,42,00ff00ff00ff00ff");
  std::stringstream ss;
  ss << results_header(cutoffs) << '\n' << format_result_row(row) << "\r\n";
  const auto back = read_results(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(format_result_row(back[0]), format_result_row(row));
  EXPECT_EQ(back[0].config_hash, row.config_hash);
}

TEST(ResultsTest, MalformedInputIsRejected) {
  std::stringstream bad_header("foo,bar\n");
  EXPECT_THROW(read_results(bad_header), InputError);
  std::stringstream short_row(results_header(std::vector<std::size_t>{20}) + "\nSR,0.1\n");
  EXPECT_THROW(read_results(short_row), InputError);
  std::stringstream empty("");
  EXPECT_TRUE(read_results(empty).empty());
}

TEST(ReportTest, SortsAndMarks) {
  const std::vector<ResultRow> rows{sample_row("SR", 0.20, 0.03),
                                    sample_row("STAN", 0.30, 0.05),
                                    sample_row("VSTAN", 0.25, 0.04),
                                    sample_row("SR", 0.10, 0.02)};
  const std::string text = render_report("DIGI", rows);
  EXPECT_NE(text.find("== DIGI =="), std::string::npos);
  const auto stan = text.find("STAN "), vstan = text.find("VSTAN"), sr = text.find("SR ");
  ASSERT_NE(stan, std::string::npos);
  EXPECT_LT(stan, vstan);
  EXPECT_LT(vstan, sr);
  EXPECT_NE(text.find("*0.300*"), std::string::npos);
  EXPECT_NE(text.find("_0.250_"), std::string::npos);
  // The later SR row replaces the earlier one.
  EXPECT_NE(text.find("0.100"), std::string::npos);
  EXPECT_EQ(text.find("0.200"), std::string::npos);
  // Lower popularity bias is marked best.
  EXPECT_NE(text.find("*0.020*"), std::string::npos);
  EXPECT_EQ(text.find("GNN"), std::string::npos);
}

TEST(ReportTest, EmptyResults) {
  EXPECT_EQ(render_report("X", {}), "== X ==\n(no results)\n");
}

}  // namespace
}  // namespace sbr
