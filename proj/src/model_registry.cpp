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
#include <charconv>
#include <cstdlib>

#include <fmt/core.h>

#include "sbr/error.hpp"
#include "sbr/models.hpp"

namespace sbr {

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "sr") return ModelKind::kSr;
  if (lower == "stan") return ModelKind::kStan;
  if (lower == "vstan") return ModelKind::kVstan;
  if (lower == "sfsknn") return ModelKind::kSfsknn;
  throw ArgumentError(fmt::format(
      "unknown model '{}' (available: sr, stan, vstan, sfsknn)", name));
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSr:
      return "SR";
    case ModelKind::kStan:
      return "STAN";
    case ModelKind::kVstan:
      return "VSTAN";
    case ModelKind::kSfsknn:
      return "SFSKNN";
  }
  return "?";
}

std::vector<std::string> model_parameters(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSr:
      return {"max_steps"};
    case ModelKind::kStan:
      return {"k", "m", "lambda1", "lambda2", "lambda3"};
    case ModelKind::kVstan:
      return {"k", "m", "lambda1", "lambda2", "lambda3", "idf_power"};
    case ModelKind::kSfsknn:
      return {"k", "m"};
  }
  return {};
}

namespace {

void check_known(ModelKind kind, const ParamSet& params) {
  const auto known = model_parameters(kind);
  for (const auto& [key, value] : params) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ArgumentError(fmt::format("{} has no parameter '{}'",
                                      to_string(kind), key));
    }
  }
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ArgumentError(fmt::format("{}: expected a count, got '{}'", key, value));
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double out = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size())
    throw ArgumentError(fmt::format("{}: expected a number, got '{}'", key, value));
  return out;
}

std::optional<double> parse_decay(const std::string& key, const ParamSet& params) {
  auto it = params.find(key);
  if (it == params.end() || it->second == "disabled") return std::nullopt;
  return parse_real(key, it->second);
}

}  // namespace

SrConfig sr_config_from(const ParamSet& params) {
  check_known(ModelKind::kSr, params);
  SrConfig config;
  auto it = params.find("max_steps");
  if (it != params.end() && it->second != "unlimited")
    config.max_steps = parse_count("max_steps", it->second);
  return config;
}

KnnConfig knn_config_from(ModelKind kind, const ParamSet& params) {
  if (kind == ModelKind::kSr) throw ArgumentError("SR is not a kNN model");
  check_known(kind, params);
  KnnConfig config;
  if (auto it = params.find("k"); it != params.end())
    config.k = parse_count("k", it->second);
  if (auto it = params.find("m"); it != params.end())
    config.m = parse_count("m", it->second);
  config.lambda1 = parse_decay("lambda1", params);
  config.lambda2 = parse_decay("lambda2", params);
  config.lambda3 = parse_decay("lambda3", params);
  if (auto it = params.find("idf_power"); it != params.end())
    config.idf_power = parse_real("idf_power", it->second);
  config.sequential_filter = kind == ModelKind::kSfsknn;
  config.validate();
  return config;
}

std::unique_ptr<Recommender> fit_model(ModelKind kind, const ParamSet& params,
                                       const SessionDataset& train,
                                       std::uint64_t /*seed*/) {
  if (train.empty()) throw InputError("cannot fit on an empty training set");
  if (kind == ModelKind::kSr)
    return std::make_unique<SequentialRules>(train, sr_config_from(params));
  return std::make_unique<SessionKnn>(train, knn_config_from(kind, params));
}

std::vector<ItemId> rank_topk(const ScoreMap& scores, std::size_t cutoff,
                              std::span<const std::uint32_t> popularity,
                              const Vocabulary& vocabulary) {
  if (cutoff < 1) throw ArgumentError("rank_topk: cutoff must be >= 1");
  struct Entry {
    ItemId item;
    double score;
    std::uint32_t pop;
  };
  std::vector<Entry> entries;
  entries.reserve(scores.size());
  for (const auto& [item, score] : scores) {
    entries.push_back(
        {item, score, item < popularity.size() ? popularity[item] : 0});
  }
  const auto before = [&](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.pop != b.pop) return a.pop > b.pop;
    if (a.item == b.item) return false;
    return vocabulary.name(a.item) < vocabulary.name(b.item);
  };
  const std::size_t n = std::min(cutoff, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(n),
                    entries.end(), before);
  std::vector<ItemId> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(entries[i].item);
  return out;
}

}  // namespace sbr
