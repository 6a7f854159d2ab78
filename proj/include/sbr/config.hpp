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

// Experiment config files. See docs/config.md for the grammar.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sbr/dataio.hpp"
#include "sbr/models.hpp"
#include "sbr/tuning.hpp"

namespace sbr {

// Generic parse tree: ordered `key = value` pairs and labelled sub-blocks.
struct ConfigNode {
  std::string name;
  std::string label;  // `model stan { ... }` has name "model", label "stan"
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<ConfigNode> children;
  std::size_t line = 0;

  const std::string* find(std::string_view key) const;
};

// Throws ArgumentError with a line number on syntax errors.
ConfigNode parse_config_text(std::string_view text,
                             const std::string& source = "<config>");

struct DatasetSpec {
  std::string name;
  RawFormat format = RawFormat::kDigi;
  std::filesystem::path path;
  std::optional<std::filesystem::path> categories;
  std::size_t fraction = 1;
  std::size_t test_days = 1;
  Timestamp retail_gap = 30 * 60;
  PreprocessOptions preprocess;
};

struct ModelEntry {
  ModelKind kind = ModelKind::kSr;
  ParamSet fixed;
  SearchSpace space;
  std::optional<std::size_t> n_trials;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<ModelEntry> models;
  std::vector<std::size_t> cutoffs{10, 20};
  std::optional<std::size_t> n_trials;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::size_t threads = 1;

  std::size_t trials_for(const ModelEntry& entry) const;
  const ModelEntry* find_model(ModelKind kind) const;
  // Seed present, cutoffs ascending and unique, every model valid.
  void validate() const;
};

// Relative paths resolve against `base_dir`.
ExperimentConfig build_config(const ConfigNode& root,
                              const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

// `key = value` lines; `#` comments.
ParamSet read_param_file(const std::filesystem::path& path);

}  // namespace sbr
