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

#include "sbr/tuning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "sbr/error.hpp"
#include "sbr/text.hpp"

namespace sbr {

namespace {

// Generator output mapped by hand so draws do not depend on the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

std::optional<double> as_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::string format_number(double v) { return fmt::format("{:.6g}", v); }

}  // namespace

Dimension Dimension::parse(std::string_view text) {
  Dimension d;
  for (auto part : split(text, '|')) {
    part = trim(part);
    if (part.empty()) throw ArgumentError(fmt::format("empty choice in '{}'", text));
    const auto open = part.find('(');
    if (open != std::string_view::npos && part.back() == ')') {
      const auto kind = part.substr(0, open);
      Range r;
      if (kind == "lin" || kind == "ilin") {
        r.scale = Range::Scale::kLinear;
      } else if (kind == "log" || kind == "ilog") {
        r.scale = Range::Scale::kLog;
      } else {
        throw ArgumentError(fmt::format("unknown range type '{}'", kind));
      }
      r.integer = kind.front() == 'i';
      const auto bounds = split(part.substr(open + 1, part.size() - open - 2), ',');
      if (bounds.size() != 2) throw ArgumentError(fmt::format("bad range '{}'", part));
      const auto lo = as_number(std::string(trim(bounds[0])));
      const auto hi = as_number(std::string(trim(bounds[1])));
      if (!lo || !hi || !(*lo < *hi))
        throw ArgumentError(fmt::format("range '{}' needs low < high", part));
      if (r.scale == Range::Scale::kLog && *lo <= 0.0)
        throw ArgumentError(fmt::format("log range '{}' needs low > 0", part));
      r.low = *lo;
      r.high = *hi;
      if (d.range) throw ArgumentError(fmt::format("two ranges in '{}'", text));
      d.range = r;
    } else {
      d.choices.emplace_back(part);
    }
  }
  if (d.choices.empty() && !d.range)
    throw ArgumentError("empty search dimension");
  return d;
}

std::string Dimension::to_string() const {
  std::string out;
  for (const auto& c : choices) {
    if (!out.empty()) out += '|';
    out += c;
  }
  if (range) {
    if (!out.empty()) out += '|';
    const char* kind = range->scale == Range::Scale::kLog ? "log" : "lin";
    out += fmt::format("{}{}({},{})", range->integer ? "i" : "", kind,
                       format_number(range->low), format_number(range->high));
  }
  return out;
}

bool Dimension::contains(const std::string& value) const {
  if (std::find(choices.begin(), choices.end(), value) != choices.end())
    return true;
  if (!range) return false;
  const auto v = as_number(value);
  if (!v) return false;
  const double slack = 1e-9 * std::max(1.0, std::abs(range->high));
  return *v >= range->low - slack && *v <= range->high + slack;
}

std::string Dimension::sample(std::mt19937_64& rng) const {
  const std::size_t options = choices.size() + (range ? 1 : 0);
  const std::size_t pick = uniform_index(rng, options);
  if (pick < choices.size()) return choices[pick];
  const double u = uniform01(rng);
  double v = range->scale == Range::Scale::kLog
                 ? std::exp(std::log(range->low) +
                            u * (std::log(range->high) - std::log(range->low)))
                 : range->low + u * (range->high - range->low);
  if (range->integer) {
    v = std::clamp(std::round(v), std::ceil(range->low), std::floor(range->high));
    return fmt::format("{}", static_cast<long long>(v));
  }
  return format_number(v);
}

void SearchSpace::set(const std::string& name, Dimension dimension) {
  dims_[name] = std::move(dimension);
}

bool SearchSpace::contains(const ParamSet& params) const {
  if (params.size() != dims_.size()) return false;
  for (const auto& [name, dim] : dims_) {
    auto it = params.find(name);
    if (it == params.end() || !dim.contains(it->second)) return false;
  }
  return true;
}

ParamSet SearchSpace::sample(std::mt19937_64& rng) const {
  ParamSet out;
  for (const auto& [name, dim] : dims_) out[name] = dim.sample(rng);
  return out;
}

SearchSpace default_search_space(ModelKind kind) {
  SearchSpace space;
  const auto decay = Dimension::parse("log(0.1,100)|disabled");
  if (kind == ModelKind::kSr) {
    space.set("max_steps", Dimension::parse("unlimited|5|10|20"));
    return space;
  }
  space.set("k", Dimension::parse("50|100|200|500|1000|1500"));
  space.set("m", Dimension::parse("500|1000|2500|5000|10000"));
  if (kind == ModelKind::kStan || kind == ModelKind::kVstan) {
    space.set("lambda1", decay);
    space.set("lambda2", decay);
    space.set("lambda3", decay);
  }
  if (kind == ModelKind::kVstan) space.set("idf_power", Dimension::parse("0|1|2|3"));
  return space;
}

std::size_t default_trials(ModelKind kind) {
  return kind == ModelKind::kSr ? 60 : 40;
}

std::string config_hash(ModelKind kind, const ParamSet& params) {
  std::string canonical(to_string(kind));
  for (const auto& [k, v] : params) canonical += fmt::format(";{}={}", k, v);
  return fmt::format("{:016x}", fnv1a(canonical));
}

// ---------------------------------------------------------------------------
// Random search

std::vector<ParamSet> sample_trials(const SearchSpace& space,
                                    std::size_t n_trials, std::uint64_t seed) {
  if (space.empty()) throw ArgumentError("random_search: empty search space");
  std::mt19937_64 rng(seed);
  std::vector<ParamSet> configs;
  configs.reserve(n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) {
    ParamSet draw = space.sample(rng);
    for (int attempt = 0; attempt < 10; ++attempt) {
      if (std::find(configs.begin(), configs.end(), draw) == configs.end()) break;
      draw = space.sample(rng);
    }
    configs.push_back(std::move(draw));
  }
  return configs;
}

SearchResult random_search(const SearchSpace& space, std::size_t n_trials,
                           std::uint64_t seed, const Objective& objective) {
  if (n_trials < 1) throw ArgumentError("random_search: n_trials must be >= 1");
  SearchResult result;
  const auto configs = sample_trials(space, n_trials, seed);
  bool any_ok = false;
  for (std::size_t t = 0; t < configs.size(); ++t) {
    Trial trial;
    trial.index = t;
    trial.config = configs[t];
    const auto start = std::chrono::steady_clock::now();
    try {
      trial.objective = objective(trial.config);
      if (!(trial.objective >= 0.0 && trial.objective <= 1.0))
        throw std::range_error(fmt::format("objective {} outside [0,1]", trial.objective));
    } catch (const std::exception& e) {
      trial.failed = true;
      trial.objective = 0.0;
      trial.note = e.what();
      std::cerr << fmt::format("warning: trial {} failed: {}\n", t, e.what());
    }
    trial.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!trial.failed && (!any_ok || trial.objective > result.best_objective)) {
      any_ok = true;
      result.best_index = t;
      result.best_objective = trial.objective;
      result.best = trial.config;
    }
    result.trials.push_back(std::move(trial));
  }
  if (!any_ok) throw TuningError(fmt::format("all {} trials failed", n_trials));
  return result;
}

Objective mrr_objective(ModelKind kind, const SessionDataset& train,
                        const SessionDataset& test, std::uint64_t seed,
                        const EvalOptions& options) {
  EvalOptions opts = options;
  if (std::find(opts.cutoffs.begin(), opts.cutoffs.end(), kObjectiveCutoff) ==
      opts.cutoffs.end())
    opts.cutoffs.push_back(kObjectiveCutoff);
  return [kind, &train, &test, seed, opts](const ParamSet& params) {
    const auto model = fit_model(kind, params, train, seed);
    return evaluate(*model, test, train, opts).metrics.mrr(kObjectiveCutoff);
  };
}

SearchResult random_search(ModelKind kind, const SearchSpace& space,
                           std::size_t n_trials, std::uint64_t seed,
                           const SessionDataset& subtrain,
                           const SessionDataset& validation,
                           const EvalOptions& options) {
  return random_search(space, n_trials, seed,
                       mrr_objective(kind, subtrain, validation, seed, options));
}

TrainTestSplit make_validation_split(const SessionDataset& train,
                                     std::size_t test_days) {
  return split_by_days(train, test_days);
}

void write_trials_csv(const SearchResult& result, const SearchSpace& space,
                      std::ostream& out) {
  out << "trial";
  for (const auto& [name, dim] : space.dimensions()) out << ',' << name;
  out << ",objective,seconds\n";
  for (const auto& t : result.trials) {
    out << t.index;
    for (const auto& [name, dim] : space.dimensions()) {
      auto it = t.config.find(name);
      out << ',' << (it == t.config.end() ? "" : it->second);
    }
    fmt::print(out, ",{:.6f},{:.3f}\n", t.objective, t.seconds);
  }
}

// ---------------------------------------------------------------------------
// Sweeps

SweepSummary summarize(std::span<const double> values) {
  SweepSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  s.diff = s.max - s.min;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  // Summation rounding can push a constant series off by an ulp.
  s.mean = std::clamp(s.mean, s.min, s.max);
  if (s.diff == 0.0) s.std = 0.0;
  return s;
}

std::string format_summary_row(const SweepSummary& s) {
  return fmt::format("{:.3f} ± {:.3f} | {:.3f} | {:.3f} | {:.3f}", s.mean, s.std,
                     s.max, s.min, s.diff);
}

SweepResult sweep(const std::string& variable,
                  const std::vector<std::string>& values,
                  const SweepObjective& objective) {
  if (values.empty()) throw ArgumentError("sweep: no values");
  SweepResult result;
  result.variable = variable;
  std::vector<double> ok;
  for (const auto& v : values) {
    SweepPoint p;
    p.value = v;
    try {
      p.mrr = objective(v);
      ok.push_back(*p.mrr);
    } catch (const std::exception& e) {
      p.note = e.what();
      std::cerr << fmt::format("warning: sweep {}={} failed: {}\n", variable, v,
                               e.what());
    }
    result.points.push_back(std::move(p));
  }
  result.summary = summarize(ok);
  return result;
}

SweepResult sweep(ModelKind kind, const ParamSet& fixed,
                  const std::string& variable,
                  const std::vector<std::string>& values, std::uint64_t seed,
                  const SessionDataset& train, const SessionDataset& test,
                  const EvalOptions& options) {
  const auto params = model_parameters(kind);
  const bool is_seed = variable == "seed";
  if (!is_seed && std::find(params.begin(), params.end(), variable) == params.end())
    throw ArgumentError(fmt::format("{} has no sweepable variable '{}'",
                                    to_string(kind), variable));
  if (is_seed) {
    for (const auto& v : values) {
      if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ArgumentError(fmt::format("seed value '{}' is not an integer", v));
    }
  }
  auto result = sweep(variable, values, [&](const std::string& value) {
    ParamSet config = fixed;
    std::uint64_t s = seed;
    if (is_seed) {
      s = std::stoull(value);
    } else {
      config[variable] = value;
    }
    return mrr_objective(kind, train, test, s, options)(config);
  });
  result.model = std::string(to_string(kind));
  return result;
}

std::vector<HistogramBin> histogram(std::span<const double> values,
                                    std::size_t bins) {
  if (bins == 0) throw ArgumentError("histogram: zero bins");
  std::vector<HistogramBin> out(bins);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b)
    out[b].center = lo + (static_cast<double>(b) + 0.5) * width;
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>((v - lo) / width);
      b = std::min(b, bins - 1);
    }
    ++out[b].count;
  }
  return out;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << "value,mrr@20\n";
  for (const auto& p : result.points) {
    if (p.mrr) {
      fmt::print(out, "{},{:.6f}\n", p.value, *p.mrr);
    } else {
      fmt::print(out, "{},\n", p.value);
    }
  }
}

void write_histogram_csv(std::span<const HistogramBin> bins, std::ostream& out) {
  out << "value,count\n";
  for (const auto& b : bins) fmt::print(out, "{:.6f},{}\n", b.center, b.count);
}

std::string render_sweep_table(std::vector<SweepResult> results) {
  std::stable_sort(results.begin(), results.end(),
                   [](const SweepResult& a, const SweepResult& b) {
                     return a.summary.diff > b.summary.diff;
                   });
  std::string out = "Models | MRR@20 mean ± std | Max MRR@20 | Min MRR@20 | Diff\n";
  for (const auto& r : results) {
    out += fmt::format("{} ({}) | {}\n", r.model, r.variable,
                       format_summary_row(r.summary));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tune on test

TuneOnTestRecord tune_on_test(const SearchSpace& space, std::size_t n_trials,
                              std::uint64_t seed,
                              const Objective& validation_objective,
                              const Objective& test_objective) {
  TuneOnTestRecord record;
  record.proper = random_search(space, n_trials, seed, validation_objective);
  record.on_test = random_search(space, n_trials, seed, test_objective);
  record.proper_test_mrr = test_objective(record.proper.best);
  record.on_test_test_mrr = test_objective(record.on_test.best);
  if (record.proper_test_mrr > 0.0) {
    record.delta_percent = (record.on_test_test_mrr - record.proper_test_mrr) /
                           record.proper_test_mrr * 100.0;
  }
  return record;
}

TuneOnTestRecord tune_on_test(ModelKind kind, const SearchSpace& space,
                              std::size_t n_trials, std::uint64_t seed,
                              const SessionDataset& train,
                              const SessionDataset& test, std::size_t test_days,
                              const EvalOptions& options) {
  const auto valid = make_validation_split(train, test_days);
  auto record = tune_on_test(
      space, n_trials, seed,
      mrr_objective(kind, valid.train, valid.test, seed, options),
      mrr_objective(kind, train, test, seed, options));
  record.model = std::string(to_string(kind));
  return record;
}

std::string format_delta_percent(std::optional<double> delta) {
  if (!delta) return "n/a";
  return fmt::format("{:+.1f}%", *delta);
}

std::string render_tune_on_test(const TuneOnTestRecord& r) {
  std::string out = fmt::format("=== {} ===\n", kFlawDemoLabel);
  out += "Hyperparameters selected on the test set are compared with a proper\n"
         "validation-based selection. The test-tuned number is optimistically\n"
         "biased and must not be reported as a result.\n";
  const auto config_text = [](const ParamSet& p) {
    std::string s;
    for (const auto& [k, v] : p) s += fmt::format("{}{}={}", s.empty() ? "" : " ", k, v);
    return s;
  };
  out += fmt::format("model: {}\n", r.model);
  out += fmt::format("properly tuned (validation): trial {} [{}] test MRR@20 = {:.4f}\n",
                     r.proper.best_index, config_text(r.proper.best),
                     r.proper_test_mrr);
  out += fmt::format("tuned on test:               trial {} [{}] test MRR@20 = {:.4f}\n",
                     r.on_test.best_index, config_text(r.on_test.best),
                     r.on_test_test_mrr);
  out += fmt::format("MRR@20 delta (test-tuned vs properly tuned): {}\n",
                     format_delta_percent(r.delta_percent));
  return out;
}

}  // namespace sbr
