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

// Incremental-reveal evaluation: every test session [i1..in] is replayed
// as n-1 next-item predictions, and the resulting top-K lists are scored
// with MRR@K, HR@K, coverage and popularity.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbr/dataio.hpp"
#include "sbr/models.hpp"

namespace sbr {

struct PredictionEvent {
  std::string_view session_id;
  std::span<const ItemId> prefix;
  ItemId target = 0;
  Timestamp query_time = 0;  // time of the target click
};

// All prediction events of a test set in session order, then position order.
class EventStream {
 public:
  explicit EventStream(const SessionDataset& test);

  std::size_t size() const { return events_.size(); }
  PredictionEvent operator[](std::size_t i) const;

 private:
  struct Ref {
    std::size_t session;
    std::size_t offset;  // start of the session in items_
    std::size_t length;  // prefix length
  };
  const SessionDataset* test_;
  std::vector<ItemId> items_;
  std::vector<Ref> events_;
};

// 1-based position of `target`, nullopt on a miss. Throws
// std::invalid_argument if the list repeats an item.
std::optional<std::size_t> rank_of_target(std::span<const ItemId> list,
                                          ItemId target);

struct CutoffMetrics {
  std::size_t cutoff = 0;
  double mrr = 0.0;
  double hr = 0.0;
};

struct MetricReport {
  std::vector<CutoffMetrics> per_cutoff;  // ascending cutoff
  std::size_t coverage_cutoff = 0;        // largest cutoff
  double cov = 0.0;
  double pop = 0.0;
  std::size_t event_count = 0;

  double mrr(std::size_t cutoff) const;
  double hr(std::size_t cutoff) const;
};

struct TimingReport {
  double train_time_min = 0.0;
  double mean_predict_ms = 0.0;
};

struct EvaluationResult {
  MetricReport metrics;
  TimingReport timing;
};

struct EvalOptions {
  std::vector<std::size_t> cutoffs{10, 20};
  std::size_t threads = 1;
};

// Replays `test` against a model fitted on `train`. Accuracy metrics do not
// depend on the worker count. Throws sbr::Error on non-finite scores.
EvaluationResult evaluate(const Recommender& model, const SessionDataset& test,
                          const SessionDataset& train,
                          const EvalOptions& options = {});

// Fits (timed) and evaluates.
EvaluationResult fit_and_evaluate(ModelKind kind, const ParamSet& params,
                                  const SessionDataset& train,
                                  const SessionDataset& test,
                                  std::uint64_t seed,
                                  const EvalOptions& options = {});

// ---------------------------------------------------------------------------
// Results files

struct ResultRow {
  std::string model;
  MetricReport metrics;
  TimingReport timing;
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Header matching `cutoffs`, e.g.
// model,mrr@10,mrr@20,hr@10,hr@20,cov@20,pop@20,t_time_min,p_time_ms,events,seed,config_hash
std::string results_header(std::span<const std::size_t> cutoffs);
std::string format_result_row(const ResultRow& row);

// Parses a results CSV written by format_result_row.
std::vector<ResultRow> read_results(std::istream& in);

// Plain-text accuracy and beyond-accuracy tables sorted by MRR@<largest
// cutoff>, best value marked *x* and runner-up _x_. Keeps the latest row
// per model.
std::string render_report(std::string_view title,
                          const std::vector<ResultRow>& rows);

}  // namespace sbr
