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

// Random-search tuning on MRR@20, one-variable robustness sweeps and the
// tune-on-test comparison.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sbr/dataio.hpp"
#include "sbr/eval.hpp"
#include "sbr/models.hpp"

namespace sbr {

inline constexpr std::size_t kObjectiveCutoff = 20;
inline constexpr std::string_view kToolVersion = "0.1.0";

// A numeric interval sampled uniformly on a linear or log scale.
struct Range {
  enum class Scale { kLinear, kLog };
  double low = 0.0;
  double high = 1.0;
  Scale scale = Scale::kLinear;
  bool integer = false;
};

// One hyperparameter: a set of literal choices, optionally plus a range.
// Sampling picks uniformly among the choices and the range (the range
// counts as one option).
//
// Text form: alternatives separated by '|'. `lin(a,b)`, `log(a,b)`,
// `ilin(a,b)` and `ilog(a,b)` are ranges (the i-variants round to
// integers); anything else is a literal, e.g. `log(0.1,100)|disabled`.
struct Dimension {
  std::vector<std::string> choices;
  std::optional<Range> range;

  static Dimension parse(std::string_view text);
  std::string to_string() const;
  bool contains(const std::string& value) const;
  std::string sample(std::mt19937_64& rng) const;
};

class SearchSpace {
 public:
  void set(const std::string& name, Dimension dimension);
  const std::map<std::string, Dimension>& dimensions() const { return dims_; }
  bool empty() const { return dims_.empty(); }
  bool contains(const ParamSet& params) const;
  ParamSet sample(std::mt19937_64& rng) const;

 private:
  std::map<std::string, Dimension> dims_;
};

SearchSpace default_search_space(ModelKind kind);
std::size_t default_trials(ModelKind kind);

// Stable hex digest of (model, params).
std::string config_hash(ModelKind kind, const ParamSet& params);

struct Trial {
  std::size_t index = 0;
  ParamSet config;
  double objective = 0.0;
  double seconds = 0.0;
  bool failed = false;
  std::string note;
};

struct SearchResult {
  std::size_t best_index = 0;
  ParamSet best;
  double best_objective = 0.0;
  std::vector<Trial> trials;  // ordered by trial index
};

using Objective = std::function<double(const ParamSet&)>;

// The n configurations random_search evaluates, in order. A duplicate of an
// earlier draw is re-drawn up to 10 times, then accepted.
std::vector<ParamSet> sample_trials(const SearchSpace& space,
                                    std::size_t n_trials, std::uint64_t seed);

// Evaluates every sampled config; a throwing objective marks the trial
// failed with objective 0. Ties keep the earlier trial. Throws TuningError
// when every trial fails.
SearchResult random_search(const SearchSpace& space, std::size_t n_trials,
                           std::uint64_t seed, const Objective& objective);

// MRR@20 of `kind` fitted on `train` and evaluated on `test`.
Objective mrr_objective(ModelKind kind, const SessionDataset& train,
                        const SessionDataset& test, std::uint64_t seed,
                        const EvalOptions& options);

SearchResult random_search(ModelKind kind, const SearchSpace& space,
                           std::size_t n_trials, std::uint64_t seed,
                           const SessionDataset& subtrain,
                           const SessionDataset& validation,
                           const EvalOptions& options);

// split_by_days applied to the training portion.
TrainTestSplit make_validation_split(const SessionDataset& train,
                                     std::size_t test_days);

void write_trials_csv(const SearchResult& result, const SearchSpace& space,
                      std::ostream& out);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  double max = 0.0;
  double min = 0.0;
  double diff = 0.0;
};

struct SweepPoint {
  std::string value;
  std::optional<double> mrr;  // nullopt: failed
  std::string note;
};

struct SweepResult {
  std::string model;
  std::string variable;
  std::vector<SweepPoint> points;
  SweepSummary summary;
};

SweepSummary summarize(std::span<const double> values);

// `mean ± std | max | min | diff`, three decimals.
std::string format_summary_row(const SweepSummary& summary);

using SweepObjective = std::function<double(const std::string& value)>;

SweepResult sweep(const std::string& variable,
                  const std::vector<std::string>& values,
                  const SweepObjective& objective);

// `variable` is "seed" or a parameter of `kind`; anything else throws
// ArgumentError.
SweepResult sweep(ModelKind kind, const ParamSet& fixed,
                  const std::string& variable,
                  const std::vector<std::string>& values, std::uint64_t seed,
                  const SessionDataset& train, const SessionDataset& test,
                  const EvalOptions& options);

struct HistogramBin {
  double center = 0.0;
  std::size_t count = 0;
};

// `bins` equal-width bins over [min, max] of the values.
std::vector<HistogramBin> histogram(std::span<const double> values,
                                    std::size_t bins = 20);

void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_histogram_csv(std::span<const HistogramBin> bins, std::ostream& out);

// Plain-text summary of several sweeps, sorted by diff descending.
std::string render_sweep_table(std::vector<SweepResult> results);

// ---------------------------------------------------------------------------
// Tuning on test data

struct TuneOnTestRecord {
  std::string model;
  SearchResult proper;   // selected on the validation split
  SearchResult on_test;  // selected on the test set
  double proper_test_mrr = 0.0;
  double on_test_test_mrr = 0.0;
  // (on_test - proper) / proper in percent; nullopt if proper is 0.
  std::optional<double> delta_percent;
};

inline constexpr std::string_view kFlawDemoLabel = "METHODOLOGICAL FLAW DEMO";

// Runs the same trial sequence twice, selecting once with
// `validation_objective` and once with `test_objective`, then scores both
// winners with `test_objective`.
TuneOnTestRecord tune_on_test(const SearchSpace& space, std::size_t n_trials,
                              std::uint64_t seed,
                              const Objective& validation_objective,
                              const Objective& test_objective);

TuneOnTestRecord tune_on_test(ModelKind kind, const SearchSpace& space,
                              std::size_t n_trials, std::uint64_t seed,
                              const SessionDataset& train,
                              const SessionDataset& test, std::size_t test_days,
                              const EvalOptions& options);

// e.g. "+1.5%"
std::string format_delta_percent(std::optional<double> delta);
std::string render_tune_on_test(const TuneOnTestRecord& record);

}  // namespace sbr
