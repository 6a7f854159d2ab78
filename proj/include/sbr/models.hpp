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

// Baseline session-based recommenders: sequential rules (SR) and the
// session-kNN family (STAN, VSTAN, SFSKNN) sharing one inverted index.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sbr/dataio.hpp"

namespace sbr {

using ScoreMap = std::unordered_map<ItemId, double>;

// Hyperparameter assignment as written in config files, e.g. {"k": "100"}.
using ParamSet = std::map<std::string, std::string>;

enum class ModelKind { kSr, kStan, kVstan, kSfsknn };

// Throws ArgumentError for anything that is not one of the four baselines.
ModelKind parse_model_kind(std::string_view name);
std::string_view to_string(ModelKind kind);
inline constexpr ModelKind kAllModels[] = {ModelKind::kSr, ModelKind::kStan,
                                           ModelKind::kVstan,
                                           ModelKind::kSfsknn};

// A fitted model. Immutable; score() may be called from many threads.
class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual ScoreMap score(std::span<const ItemId> prefix,
                         Timestamp query_time) const = 0;
};

// ---------------------------------------------------------------------------
// Sequential rules

struct SrConfig {
  std::optional<std::size_t> max_steps;  // nullopt: unlimited
};

// antecedent -> consequent -> weight
using RuleTable = std::unordered_map<ItemId, std::unordered_map<ItemId, double>>;

// Adds 1/d to rule item[a] -> item[b] for every pair a < b with d = b - a
// within max_steps.
RuleTable sr_fit(const SessionDataset& train, const SrConfig& config);

// Rules of the last prefix item only.
ScoreMap sr_score(const RuleTable& table, std::span<const ItemId> prefix);

class SequentialRules final : public Recommender {
 public:
  SequentialRules(const SessionDataset& train, const SrConfig& config)
      : rules_(sr_fit(train, config)) {}

  ScoreMap score(std::span<const ItemId> prefix, Timestamp) const override {
    return sr_score(rules_, prefix);
  }
  const RuleTable& rules() const { return rules_; }

 private:
  RuleTable rules_;
};

// ---------------------------------------------------------------------------
// Session kNN

struct KnnConfig {
  std::size_t k = 100;
  std::size_t m = 1000;
  std::optional<double> lambda1;  // within-session position decay
  std::optional<double> lambda2;  // inter-session time decay, in days
  std::optional<double> lambda3;  // neighbor-position decay
  double idf_power = 0.0;
  bool sequential_filter = false;

  // Throws ArgumentError when k < 1, m < k, a lambda <= 0 or idf_power < 0.
  void validate() const;
};

// Index of a training session. Training sessions are numbered in dataset
// order (ascending start time), so a larger ref is a more recent session.
using SessionRef = std::uint32_t;

class SessionIndex {
 public:
  explicit SessionIndex(const SessionDataset& train);

  std::size_t session_count() const { return starts_.size(); }
  std::span<const ItemId> items(SessionRef s) const {
    return {items_.data() + offsets_[s], offsets_[s + 1] - offsets_[s]};
  }
  Timestamp start_time(SessionRef s) const { return starts_[s]; }
  std::size_t distinct_count(SessionRef s) const { return distinct_[s]; }

  // Sessions containing `item`, most recent first, each exactly once.
  std::span<const SessionRef> postings(ItemId item) const;
  std::uint32_t document_frequency(ItemId item) const {
    return static_cast<std::uint32_t>(postings(item).size());
  }
  std::uint32_t popularity(ItemId item) const {
    return item < popularity_.size() ? popularity_[item] : 0;
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<ItemId> items_;
  std::vector<Timestamp> starts_;
  std::vector<std::uint32_t> distinct_;
  std::vector<std::size_t> posting_offsets_;
  std::vector<SessionRef> posting_data_;
  std::vector<std::uint32_t> popularity_;
};

struct Neighbor {
  SessionRef session = 0;
  double similarity = 0.0;
};

// Top-k of the m most recent sessions sharing an item with the prefix,
// ordered by similarity (ties: more recent first).
std::vector<Neighbor> retrieve_neighbors(const SessionIndex& index,
                                         std::span<const ItemId> prefix,
                                         Timestamp query_time,
                                         const KnnConfig& config);

ScoreMap knn_score(const SessionIndex& index,
                   std::span<const Neighbor> neighbors,
                   std::span<const ItemId> prefix, const KnnConfig& config);

class SessionKnn final : public Recommender {
 public:
  SessionKnn(const SessionDataset& train, const KnnConfig& config);

  ScoreMap score(std::span<const ItemId> prefix,
                 Timestamp query_time) const override;
  const SessionIndex& index() const { return index_; }
  const KnnConfig& config() const { return config_; }

 private:
  KnnConfig config_;
  SessionIndex index_;
};

// ---------------------------------------------------------------------------
// Ranking and construction

// Top-K items by score; ties by popularity descending, then item name.
std::vector<ItemId> rank_topk(const ScoreMap& scores, std::size_t cutoff,
                              std::span<const std::uint32_t> popularity,
                              const Vocabulary& vocabulary);

// Parameter names a kind accepts (and tunes).
std::vector<std::string> model_parameters(ModelKind kind);

SrConfig sr_config_from(const ParamSet& params);
KnnConfig knn_config_from(ModelKind kind, const ParamSet& params);

// Validates `params` and fits. `seed` is accepted for a uniform contract;
// every baseline is deterministic and ignores it.
std::unique_ptr<Recommender> fit_model(ModelKind kind, const ParamSet& params,
                                       const SessionDataset& train,
                                       std::uint64_t seed);

}  // namespace sbr
