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

#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

#include "sbr/commands.hpp"
#include "sbr/error.hpp"
#include "sbr/tuning.hpp"

namespace sbr {

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Session-based recommendation benchmarking toolkit", "sbrbench"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;
  bool tune_on_test_flag = false;
  app.add_option("--config", config_path, "Experiment config file");
  app.add_option("--seed", seed, "Master seed (overrides config)");
  app.add_option("--out", out_dir, "Output directory (overrides config)");
  app.add_option("--threads", threads, "Evaluation worker threads")
      ->check(CLI::PositiveNumber);
  app.add_flag("--tune-on-test", tune_on_test_flag,
               "With tune: also run the tune-on-test comparison");

  std::vector<std::string> models;
  const auto add_models = [&](CLI::App* sub) {
    sub->add_option("--model", models, "Model(s): sr, stan, vstan, sfsknn")
        ->delimiter(',');
  };

  auto* prepare = app.add_subcommand("prepare", "Ingest, preprocess and split a dataset");
  auto* tune = app.add_subcommand("tune", "Random-search tuning on the validation split");
  add_models(tune);
  bool smoke = false;
  tune->add_flag("--smoke", smoke, "Few trials over small neighborhoods");
  auto* eval = app.add_subcommand("eval", "Evaluate tuned models on the test split");
  add_models(eval);
  auto* sweep = app.add_subcommand("sweep", "MRR@20 over values of one variable");
  add_models(sweep);
  std::string variable;
  std::vector<std::string> values;
  std::string split = "test";
  sweep->add_option("--variable", variable, "Parameter name or 'seed'")->required();
  sweep->add_option("--values", values, "Comma-separated values")
      ->delimiter(',')
      ->required();
  sweep->add_option("--split", split, "test or validation")
      ->check(CLI::IsMember({"test", "validation"}));
  auto* report = app.add_subcommand("report", "Render results as text tables");
  std::string results_path;
  std::string title;
  report->add_option("--results", results_path, "Results CSV (default: <out>/results.csv)");
  report->add_option("--title", title, "Table title");

  for (auto* sub : {prepare, tune, eval, sweep, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kBadArguments);
  }

  try {
    if (report->parsed() && !results_path.empty()) {
      const std::string text = cmd_report(results_path, title.empty() ? results_path : title);
      out << text;
      return 0;
    }
    if (config_path.empty()) throw ArgumentError("--config is required");
    ExperimentConfig config = load_config(config_path);
    if (seed) config.seed = seed;
    if (out_dir) config.out = *out_dir;
    if (threads) config.threads = *threads;
    config.validate();

    if (prepare->parsed()) {
      cmd_prepare(config, out);
    } else if (tune->parsed()) {
      cmd_tune(config, select_models(config, models),
               TuneOptions{tune_on_test_flag, smoke}, out);
    } else if (eval->parsed()) {
      cmd_eval(config, select_models(config, models), out);
    } else if (sweep->parsed()) {
      cmd_sweep(config, select_models(config, models),
                SweepRequest{variable, values, split == "validation"}, out);
    } else if (report->parsed()) {
      const auto path = config.out / files::kResults;
      const std::string text =
          cmd_report(path, title.empty() ? config.dataset.name : title);
      std::ofstream(config.out / files::kReport, std::ios::binary) << text;
      out << text;
    }
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace sbr
