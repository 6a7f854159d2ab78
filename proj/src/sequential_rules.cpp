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

#include "sbr/models.hpp"

namespace sbr {

RuleTable sr_fit(const SessionDataset& train, const SrConfig& config) {
  RuleTable rules;
  for (const auto& session : train.sessions()) {
    const auto& ev = session.events;
    const std::size_t n = ev.size();
    for (std::size_t a = 0; a < n; ++a) {
      std::size_t last = n - 1;
      if (config.max_steps) last = std::min(last, a + *config.max_steps);
      if (last <= a) continue;
      auto& consequents = rules[ev[a].item];
      for (std::size_t b = a + 1; b <= last; ++b) {
        consequents[ev[b].item] += 1.0 / static_cast<double>(b - a);
      }
    }
  }
  return rules;
}

ScoreMap sr_score(const RuleTable& table, std::span<const ItemId> prefix) {
  if (prefix.empty()) return {};
  auto it = table.find(prefix.back());
  if (it == table.end()) return {};
  return ScoreMap(it->second.begin(), it->second.end());
}

}  // namespace sbr
