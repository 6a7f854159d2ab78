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

#include "sbr/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "sbr/error.hpp"
#include "sbr/text.hpp"

namespace sbr {

const std::string* ConfigNode::find(std::string_view key) const {
  const std::string* hit = nullptr;
  for (const auto& [k, v] : values)
    if (k == key) hit = &v;  // last assignment wins
  return hit;
}

ConfigNode parse_config_text(std::string_view text, const std::string& source) {
  ConfigNode root;
  std::vector<ConfigNode*> stack{&root};
  std::size_t lineno = 0;
  for (auto raw : split(text, '\n')) {
    ++lineno;
    const auto error = [&](std::string_view why) {
      return ArgumentError(fmt::format("{}:{}: {}", source, lineno, why));
    };
    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line == "}") {
      if (stack.size() == 1) throw error("unmatched '}'");
      stack.pop_back();
      continue;
    }
    if (line.back() == '{') {
      auto header = trim(line.substr(0, line.size() - 1));
      if (header.empty()) throw error("block without a name");
      ConfigNode child;
      child.line = lineno;
      const auto space = header.find_first_of(" \t");
      child.name = std::string(header.substr(0, space));
      if (space != std::string_view::npos)
        child.label = std::string(trim(header.substr(space)));
      stack.back()->children.push_back(std::move(child));
      stack.push_back(&stack.back()->children.back());
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw error("expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw error("empty key");
    stack.back()->values.emplace_back(std::string(key), std::string(value));
  }
  if (stack.size() != 1)
    throw ArgumentError(fmt::format("{}: unterminated block '{}'", source,
                                    stack.back()->name));
  return root;
}

namespace {

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
    throw ArgumentError(fmt::format("{}: expected a non-negative integer, got '{}'",
                                    key, value));
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& value) {
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

std::vector<std::size_t> parse_cutoffs(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) out.push_back(parse_u64("cutoffs", trim(part)));
  return out;
}

void reject_unknown(const ConfigNode& node,
                    std::initializer_list<std::string_view> keys) {
  for (const auto& [k, v] : node.values) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw ArgumentError(fmt::format("unknown key '{}' in {} block (line {})", k,
                                      node.name.empty() ? "top-level" : node.name,
                                      node.line));
  }
}

}  // namespace

ExperimentConfig build_config(const ConfigNode& root,
                              const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  reject_unknown(root, {"seed", "out", "cutoffs", "n_trials", "threads"});
  if (auto v = root.find("seed")) cfg.seed = parse_u64("seed", *v);
  if (auto v = root.find("out")) cfg.out = resolve(base_dir, *v);
  if (auto v = root.find("cutoffs")) cfg.cutoffs = parse_cutoffs(*v);
  if (auto v = root.find("n_trials")) cfg.n_trials = parse_u64("n_trials", *v);
  if (auto v = root.find("threads")) cfg.threads = parse_u64("threads", *v);

  bool have_dataset = false;
  for (const auto& child : root.children) {
    if (child.name == "dataset") {
      have_dataset = true;
      reject_unknown(child, {"name", "format", "path", "categories", "fraction",
                             "test_days", "retail_gap", "min_item_support",
                             "min_session_length"});
      auto& d = cfg.dataset;
      const auto* format = child.find("format");
      const auto* path = child.find("path");
      if (!format || !path)
        throw ArgumentError("dataset block needs 'format' and 'path'");
      try {
        d.format = parse_raw_format(*format);
      } catch (const InputError& e) {
        throw ArgumentError(e.what());
      }
      d.path = resolve(base_dir, *path);
      d.name = child.find("name") ? *child.find("name") : std::string(*format);
      if (auto v = child.find("categories")) d.categories = resolve(base_dir, *v);
      if (auto v = child.find("fraction")) d.fraction = parse_u64("fraction", *v);
      if (auto v = child.find("test_days")) d.test_days = parse_u64("test_days", *v);
      if (auto v = child.find("retail_gap"))
        d.retail_gap = static_cast<Timestamp>(parse_u64("retail_gap", *v));
      if (auto v = child.find("min_item_support"))
        d.preprocess.min_item_support = parse_u64("min_item_support", *v);
      if (auto v = child.find("min_session_length"))
        d.preprocess.min_session_length = parse_u64("min_session_length", *v);
    } else if (child.name == "model") {
      ModelEntry entry;
      entry.kind = parse_model_kind(child.label);
      reject_unknown(child, {"n_trials", "default_space"});
      if (auto v = child.find("n_trials")) entry.n_trials = parse_u64("n_trials", *v);
      bool defaults = true;
      if (auto v = child.find("default_space")) defaults = *v != "false";
      if (defaults) entry.space = default_search_space(entry.kind);
      const auto known = model_parameters(entry.kind);
      for (const auto& block : child.children) {
        if (block.name != "params" && block.name != "search")
          throw ArgumentError(fmt::format("unknown block '{}' in model {} (line {})",
                                          block.name, child.label, block.line));
        for (const auto& [k, v] : block.values) {
          if (std::find(known.begin(), known.end(), k) == known.end())
            throw ArgumentError(fmt::format("{} has no parameter '{}' (line {})",
                                            to_string(entry.kind), k, block.line));
          if (block.name == "params") {
            entry.fixed[k] = v;
          } else {
            entry.space.set(k, Dimension::parse(v));
          }
        }
      }
      cfg.models.push_back(std::move(entry));
    } else {
      throw ArgumentError(fmt::format("unknown block '{}' (line {})", child.name,
                                      child.line));
    }
  }
  if (!have_dataset) throw ArgumentError("config has no dataset block");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return build_config(parse_config_text(text.str(), path.string()),
                      path.parent_path());
}

std::size_t ExperimentConfig::trials_for(const ModelEntry& entry) const {
  if (entry.n_trials) return *entry.n_trials;
  if (n_trials) return *n_trials;
  return default_trials(entry.kind);
}

const ModelEntry* ExperimentConfig::find_model(ModelKind kind) const {
  for (const auto& m : models)
    if (m.kind == kind) return &m;
  return nullptr;
}

void ExperimentConfig::validate() const {
  if (!seed) throw ArgumentError("no seed given (set 'seed' or pass --seed)");
  if (cutoffs.empty()) throw ArgumentError("cutoffs must not be empty");
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    if (cutoffs[i] < 1) throw ArgumentError("cutoffs must be >= 1");
    if (i > 0 && cutoffs[i] <= cutoffs[i - 1])
      throw ArgumentError("cutoffs must be sorted ascending without repeats");
  }
  if (dataset.fraction < 1) throw ArgumentError("fraction must be >= 1");
  if (dataset.test_days < 1) throw ArgumentError("test_days must be >= 1");
  if (threads < 1) throw ArgumentError("threads must be >= 1");
  for (const auto& m : models) {
    if (trials_for(m) < 1) throw ArgumentError("n_trials must be >= 1");
    if (m.space.empty())
      throw ArgumentError(fmt::format("{} has an empty search space",
                                      to_string(m.kind)));
  }
}

ParamSet read_param_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw MissingArtifactError(fmt::format("missing tuned config '{}'", path.string()));
  ParamSet params;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw InputError(fmt::format("{}:{}: expected 'key = value'", path.string(),
                                   lineno));
    params[std::string(trim(view.substr(0, eq)))] =
        std::string(trim(view.substr(eq + 1)));
  }
  return params;
}

}  // namespace sbr
