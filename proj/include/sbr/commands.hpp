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

// The `sbrbench` subcommands as library calls. Each command owns
// `config.out` for its duration and writes its artifacts there.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sbr/config.hpp"
#include "sbr/models.hpp"

namespace sbr {

namespace files {
inline constexpr const char* kNormalized = "normalized.csv";
inline constexpr const char* kTrain = "train.csv";
inline constexpr const char* kTest = "test.csv";
inline constexpr const char* kValidTrain = "valid_train.csv";
inline constexpr const char* kValidTest = "valid_test.csv";
inline constexpr const char* kStats = "stats.csv";
inline constexpr const char* kResults = "results.csv";
inline constexpr const char* kReport = "report.txt";

std::string best_config(ModelKind kind);  // best_<model>.cfg
}  // namespace files

// Models named on the command line, or every model in the config.
std::vector<ModelKind> select_models(const ExperimentConfig& config,
                                     const std::vector<std::string>& names);

void cmd_prepare(const ExperimentConfig& config, std::ostream& log);

struct TuneOptions {
  bool tune_on_test = false;
  bool smoke = false;
};
void cmd_tune(const ExperimentConfig& config,
              const std::vector<ModelKind>& models, const TuneOptions& options,
              std::ostream& log);

void cmd_eval(const ExperimentConfig& config,
              const std::vector<ModelKind>& models, std::ostream& log);

struct SweepRequest {
  std::string variable;
  std::vector<std::string> values;
  bool on_validation = false;  // default: train/test split
};
void cmd_sweep(const ExperimentConfig& config,
               const std::vector<ModelKind>& models, const SweepRequest& request,
               std::ostream& log);

// Renders `results` (a results CSV) and returns the text.
std::string cmd_report(const std::filesystem::path& results,
                       const std::string& title);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace sbr
