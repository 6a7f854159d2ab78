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

#include "sbr/commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/core.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "sbr/error.hpp"
#include "sbr/eval.hpp"
#include "sbr/tuning.hpp"

namespace sbr {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string files::best_config(ModelKind kind) {
  std::string name(to_string(kind));
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return "best_" + name + ".cfg";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::ofstream open_output(const fs::path& path,
                          std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::binary | std::ios::out | mode);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

void write_json(const fs::path& path, const json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

json params_json(const ParamSet& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

struct LoadedSplit {
  std::shared_ptr<Vocabulary> vocabulary = std::make_shared<Vocabulary>();
  SessionDataset train;
  SessionDataset test;
};

LoadedSplit load_split(const fs::path& dir, const char* train_file,
                       const char* test_file) {
  LoadedSplit split;
  split.train = read_normalized(dir / train_file, split.vocabulary);
  split.test = read_normalized(dir / test_file, split.vocabulary);
  if (split.train.empty() || split.test.empty())
    throw InputError(fmt::format("empty split files in '{}'", dir.string()));
  return split;
}

EvalOptions eval_options(const ExperimentConfig& config) {
  EvalOptions options;
  options.cutoffs = config.cutoffs;
  options.threads = config.threads;
  return options;
}

const ModelEntry& model_entry(const ExperimentConfig& config, ModelKind kind,
                              ModelEntry& fallback) {
  if (const auto* entry = config.find_model(kind)) return *entry;
  fallback.kind = kind;
  fallback.space = default_search_space(kind);
  return fallback;
}

// Shrinks kNN spaces to cheap neighborhoods for a quick end-to-end run.
SearchSpace smoke_space(ModelKind kind, SearchSpace space) {
  if (kind != ModelKind::kSr) {
    space.set("k", Dimension::parse("50|100|200|500"));
    space.set("m", Dimension::parse("500|1000"));
  }
  return space;
}

void write_best_config(const fs::path& path, ModelKind kind,
                       const SearchResult& result) {
  std::string text = fmt::format("# sbrbench {}\n", kToolVersion);
  text += fmt::format("# model: {}\n", to_string(kind));
  text += fmt::format("# config_hash: {}\n", config_hash(kind, result.best));
  text += fmt::format("# validation MRR@20: {:.6f} (trial {})\n",
                      result.best_objective, result.best_index);
  for (const auto& [k, v] : result.best) text += fmt::format("{} = {}\n", k, v);
  write_text(path, text);
}

ParamSet tuned_or_fixed(const ExperimentConfig& config, ModelKind kind,
                        bool require_tuned) {
  const fs::path path = config.out / files::best_config(kind);
  if (fs::exists(path) || require_tuned) return read_param_file(path);
  if (const auto* entry = config.find_model(kind)) return entry->fixed;
  return {};
}

}  // namespace

std::vector<ModelKind> select_models(const ExperimentConfig& config,
                                     const std::vector<std::string>& names) {
  std::vector<ModelKind> out;
  if (names.empty()) {
    for (const auto& m : config.models) out.push_back(m.kind);
    if (out.empty()) throw ArgumentError("no models in config and none given");
    return out;
  }
  for (const auto& n : names) out.push_back(parse_model_kind(n));
  return out;
}

void cmd_prepare(const ExperimentConfig& config, std::ostream& log) {
  const auto& d = config.dataset;
  if (!fs::exists(d.path))
    throw InputError(fmt::format("raw data file not found: {}", d.path.string()));
  if (d.categories && !fs::exists(*d.categories))
    throw InputError(fmt::format("category file not found: {}",
                                 d.categories->string()));
  fs::create_directories(config.out);

  auto events = ingest(d.path, d.format, IngestOptions{d.retail_gap});
  if (d.categories) attach_categories(events, ingest_categories(*d.categories, d.format));
  fmt::print(log, "ingested {} events from {}\n", events.size(), d.path.string());
  SessionDataset data = preprocess(events, d.preprocess);
  events.clear();
  if (d.fraction > 1) data = temporal_fraction(data, d.fraction);
  const DatasetStats stats = compute_stats(data);

  const auto split = split_by_days(data, d.test_days);
  const auto valid = make_validation_split(split.train, d.test_days);

  write_normalized(data, config.out / files::kNormalized);
  write_normalized(split.train, config.out / files::kTrain);
  write_normalized(split.test, config.out / files::kTest);
  write_normalized(valid.train, config.out / files::kValidTrain);
  write_normalized(valid.test, config.out / files::kValidTest);
  {
    auto out = open_output(config.out / files::kStats);
    write_stats(stats, out);
  }
  json meta;
  meta["tool_version"] = kToolVersion;
  meta["dataset"] = d.name;
  meta["format"] = to_string(d.format);
  meta["fraction"] = d.fraction;
  meta["test_days"] = d.test_days;
  meta["stats"] = {{"clicks", stats.clicks},
                   {"items", stats.items},
                   {"categories", stats.categories},
                   {"sessions", stats.sessions},
                   {"avg_session_length", stats.avg_session_length}};
  meta["split_boundary"] = split.split_boundary;
  meta["train_sessions"] = split.train.size();
  meta["test_sessions"] = split.test.size();
  meta["validation_boundary"] = valid.split_boundary;
  meta["valid_train_sessions"] = valid.train.size();
  meta["valid_test_sessions"] = valid.test.size();
  write_json(config.out / "prepare.json", meta);

  std::ostringstream row;
  write_stats(stats, row);
  fmt::print(log, "{}", row.str());
  fmt::print(log, "train {} sessions / test {} sessions; validation {} / {}\n",
             split.train.size(), split.test.size(), valid.train.size(),
             valid.test.size());
}

void cmd_tune(const ExperimentConfig& config,
              const std::vector<ModelKind>& models, const TuneOptions& options,
              std::ostream& log) {
  const auto valid = load_split(config.out, files::kValidTrain, files::kValidTest);
  std::optional<LoadedSplit> full;
  if (options.tune_on_test) full = load_split(config.out, files::kTrain, files::kTest);
  const auto eval = eval_options(config);

  for (ModelKind kind : models) {
    ModelEntry fallback;
    const ModelEntry& entry = model_entry(config, kind, fallback);
    SearchSpace space = entry.space;
    std::size_t n_trials = config.trials_for(entry);
    if (options.smoke) {
      space = smoke_space(kind, space);
      n_trials = std::min<std::size_t>(n_trials, 5);
    }
    const std::string stem = lower(to_string(kind));
    fmt::print(log, "tuning {}: {} trials, seed {}\n", to_string(kind), n_trials,
               *config.seed);

    const SearchResult result = random_search(kind, space, n_trials, *config.seed,
                                              valid.train, valid.test, eval);
    write_best_config(config.out / files::best_config(kind), kind, result);
    {
      auto out = open_output(config.out / fmt::format("trials_{}.csv", stem));
      write_trials_csv(result, space, out);
    }
    json summary;
    summary["tool_version"] = kToolVersion;
    summary["model"] = to_string(kind);
    summary["seed"] = *config.seed;
    summary["n_trials"] = n_trials;
    summary["search_space"] = json::object();
    for (const auto& [name, dim] : space.dimensions())
      summary["search_space"][name] = dim.to_string();
    summary["best_trial"] = result.best_index;
    summary["best_objective"] = result.best_objective;
    summary["best_config"] = params_json(result.best);
    summary["config_hash"] = config_hash(kind, result.best);
    json failed = json::array();
    for (const auto& t : result.trials)
      if (t.failed) failed.push_back({{"trial", t.index}, {"error", t.note}});
    summary["failed_trials"] = failed;
    write_json(config.out / fmt::format("tuning_{}.json", stem), summary);
    fmt::print(log, "best {} validation MRR@20 = {:.4f} (trial {})\n",
               to_string(kind), result.best_objective, result.best_index);

    if (options.tune_on_test) {
      const auto record = tune_on_test(kind, space, n_trials, *config.seed,
                                       full->train, full->test,
                                       config.dataset.test_days, eval);
      const std::string text = render_tune_on_test(record);
      write_text(config.out / fmt::format("tune_on_test_{}.txt", stem), text);
      json j;
      j["label"] = kFlawDemoLabel;
      j["tool_version"] = kToolVersion;
      j["model"] = record.model;
      j["proper_best"] = params_json(record.proper.best);
      j["test_tuned_best"] = params_json(record.on_test.best);
      j["proper_test_mrr@20"] = record.proper_test_mrr;
      j["test_tuned_test_mrr@20"] = record.on_test_test_mrr;
      j["delta"] = format_delta_percent(record.delta_percent);
      write_json(config.out / fmt::format("tune_on_test_{}.json", stem), j);
      fmt::print(log, "{}", text);
    }
  }
}

void cmd_eval(const ExperimentConfig& config,
              const std::vector<ModelKind>& models, std::ostream& log) {
  std::vector<std::pair<ModelKind, ParamSet>> tuned;
  for (ModelKind kind : models) tuned.emplace_back(kind, tuned_or_fixed(config, kind, true));
  const auto split = load_split(config.out, files::kTrain, files::kTest);
  const auto eval = eval_options(config);

  const fs::path results = config.out / files::kResults;
  const bool fresh = !fs::exists(results) || fs::file_size(results) == 0;
  auto out = open_output(results, std::ios::app);
  if (fresh) out << results_header(config.cutoffs) << '\n';
  for (const auto& [kind, params] : tuned) {
    fmt::print(log, "evaluating {}\n", to_string(kind));
    const auto r =
        fit_and_evaluate(kind, params, split.train, split.test, *config.seed, eval);
    ResultRow row{std::string(to_string(kind)), r.metrics, r.timing, *config.seed,
                  config_hash(kind, params)};
    out << format_result_row(row) << '\n';
    out.flush();
    fmt::print(log, "{}\n", render_report(config.dataset.name, {row}));
  }
}

void cmd_sweep(const ExperimentConfig& config,
               const std::vector<ModelKind>& models, const SweepRequest& request,
               std::ostream& log) {
  if (request.values.empty()) throw ArgumentError("sweep: --values is empty");
  for (ModelKind kind : models) {
    const auto params = model_parameters(kind);
    if (request.variable != "seed" &&
        std::find(params.begin(), params.end(), request.variable) == params.end())
      throw ArgumentError(fmt::format("{} has no sweepable variable '{}'",
                                      to_string(kind), request.variable));
  }
  const auto split = request.on_validation
                         ? load_split(config.out, files::kValidTrain, files::kValidTest)
                         : load_split(config.out, files::kTrain, files::kTest);
  const auto eval = eval_options(config);

  std::vector<SweepResult> all;
  for (ModelKind kind : models) {
    const ParamSet fixed = tuned_or_fixed(config, kind, false);
    auto result = sweep(kind, fixed, request.variable, request.values, *config.seed,
                        split.train, split.test, eval);
    const std::string stem =
        fmt::format("sweep_{}_{}", lower(to_string(kind)), request.variable);
    {
      auto out = open_output(config.out / (stem + ".csv"));
      write_sweep_csv(result, out);
    }
    std::vector<double> values;
    for (const auto& p : result.points)
      if (p.mrr) values.push_back(*p.mrr);
    {
      auto out = open_output(config.out / (stem + "_hist.csv"));
      write_histogram_csv(histogram(values), out);
    }
    json j;
    j["tool_version"] = kToolVersion;
    j["model"] = result.model;
    j["variable"] = result.variable;
    j["split"] = request.on_validation ? "validation" : "test";
    j["config_hash"] = config_hash(kind, fixed);
    j["fixed_config"] = params_json(fixed);
    j["summary"] = {{"count", result.summary.count},
                    {"mean", result.summary.mean},
                    {"std", result.summary.std},
                    {"max", result.summary.max},
                    {"min", result.summary.min},
                    {"diff", result.summary.diff}};
    j["row"] = format_summary_row(result.summary);
    json failed = json::array();
    for (const auto& p : result.points)
      if (!p.mrr) failed.push_back({{"value", p.value}, {"error", p.note}});
    j["failed_values"] = failed;
    write_json(config.out / (stem + ".json"), j);
    all.push_back(std::move(result));
  }
  const std::string table = render_sweep_table(all);
  write_text(config.out / fmt::format("sweep_summary_{}.txt", request.variable), table);
  fmt::print(log, "{}", table);
}

std::string cmd_report(const fs::path& results, const std::string& title) {
  std::ifstream in(results, std::ios::binary);
  if (!in)
    throw MissingArtifactError(fmt::format("no results file '{}'", results.string()));
  return render_report(title, read_results(in));
}

}  // namespace sbr
