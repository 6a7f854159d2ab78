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

// Click-stream ingestion, preprocessing and temporal splitting.
//
// Raw files are parsed into InteractionEvents with opaque string ids. The
// preprocessing step groups them into sessions and interns item ids into a
// Vocabulary that is shared by every dataset derived from it (fractions,
// train/test splits), so dense ItemIds stay comparable across splits.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sbr {

using Timestamp = std::int64_t;  // seconds since the Unix epoch, UTC
using ItemId = std::uint32_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

enum class RawFormat { kRsc15, kDigi, kRetail };

RawFormat parse_raw_format(std::string_view tag);
std::string_view to_string(RawFormat format);

struct InteractionEvent {
  std::string session_id;
  std::string item_id;
  Timestamp timestamp = 0;
  std::optional<std::string> category_id;
};

// Bidirectional mapping between opaque item strings and dense ids.
class Vocabulary {
 public:
  ItemId intern(std::string_view name);
  std::optional<ItemId> find(std::string_view name) const;
  const std::string& name(ItemId id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ItemId> ids_;
};

struct Click {
  ItemId item = 0;
  Timestamp time = 0;

  friend bool operator==(const Click&, const Click&) = default;
};

struct Session {
  std::string session_id;
  std::vector<Click> events;  // non-decreasing time, ties in file order
  Timestamp start_time = 0;
  Timestamp end_time = 0;

  std::size_t size() const { return events.size(); }
  std::vector<ItemId> items() const;
};

// Builds a Session and fills start/end times. `events` must be time ordered.
Session make_session(std::string session_id, std::vector<Click> events);

class SessionDataset {
 public:
  SessionDataset() = default;
  // Sorts sessions by (start_time, session_id) and recomputes the catalog.
  SessionDataset(std::vector<Session> sessions,
                 std::shared_ptr<const Vocabulary> vocabulary,
                 std::shared_ptr<const std::unordered_map<ItemId, std::string>>
                     categories = nullptr);

  const std::vector<Session>& sessions() const { return sessions_; }
  const Vocabulary& vocabulary() const { return *vocabulary_; }
  const std::shared_ptr<const Vocabulary>& vocabulary_ptr() const {
    return vocabulary_;
  }
  const std::shared_ptr<const std::unordered_map<ItemId, std::string>>&
  category_map() const {
    return categories_;
  }

  // Occurrence count of an item in this dataset; zero outside the catalog.
  std::uint32_t popularity(ItemId item) const {
    return item < popularity_.size() ? popularity_[item] : 0;
  }
  const std::vector<std::uint32_t>& popularity_table() const {
    return popularity_;
  }
  bool contains(ItemId item) const { return popularity(item) > 0; }
  std::size_t catalog_size() const { return catalog_size_; }
  std::uint32_t max_popularity() const { return max_popularity_; }

  bool empty() const { return sessions_.empty(); }
  std::size_t size() const { return sessions_.size(); }
  std::size_t click_count() const;

  // Same vocabulary and categories, different session subset.
  SessionDataset with_sessions(std::vector<Session> sessions) const;

 private:
  std::vector<Session> sessions_;
  std::shared_ptr<const Vocabulary> vocabulary_;
  std::shared_ptr<const std::unordered_map<ItemId, std::string>> categories_;
  std::vector<std::uint32_t> popularity_;
  std::size_t catalog_size_ = 0;
  std::uint32_t max_popularity_ = 0;
};

struct DatasetStats {
  std::size_t clicks = 0;
  std::size_t items = 0;
  std::size_t categories = 0;
  std::size_t sessions = 0;
  double avg_session_length = 0.0;
};

struct TrainTestSplit {
  SessionDataset train;
  SessionDataset test;
  Timestamp split_boundary = 0;
};

struct IngestOptions {
  Timestamp retail_gap = 30 * 60;  // idle gap that starts a new visit
};

// Parses a raw dump. Throws InputError naming the line of the first
// malformed row.
std::vector<InteractionEvent> ingest(std::istream& in, RawFormat format,
                                     const IngestOptions& options = {},
                                     const std::string& source = "<stream>");
std::vector<InteractionEvent> ingest(const std::filesystem::path& path,
                                     RawFormat format,
                                     const IngestOptions& options = {});

// Item to category side tables: DIGI `itemId;categoryId` files and RETAIL
// `timestamp,itemid,property,value` item property files (latest
// `categoryid` value wins).
std::unordered_map<std::string, std::string> ingest_categories(
    const std::filesystem::path& path, RawFormat format);
void attach_categories(std::vector<InteractionEvent>& events,
                       const std::unordered_map<std::string, std::string>& map);

struct PreprocessOptions {
  std::size_t min_item_support = 5;
  std::size_t min_session_length = 2;
};

SessionDataset preprocess(const std::vector<InteractionEvent>& events,
                          const PreprocessOptions& options = {});

// Keeps the most recent ceil(sessions / denominator) sessions.
SessionDataset temporal_fraction(const SessionDataset& dataset,
                                 std::size_t denominator);

TrainTestSplit split_by_days(const SessionDataset& dataset,
                             std::size_t test_days);

DatasetStats compute_stats(const SessionDataset& dataset);

// Normalized `session_id,item_id,time,category` CSV. Reading interns items
// into `vocabulary` so several files can share one id space.
void write_normalized(const SessionDataset& dataset, std::ostream& out);
void write_normalized(const SessionDataset& dataset,
                      const std::filesystem::path& path);
SessionDataset read_normalized(std::istream& in,
                               const std::shared_ptr<Vocabulary>& vocabulary,
                               const std::string& source = "<stream>");
SessionDataset read_normalized(const std::filesystem::path& path,
                               const std::shared_ptr<Vocabulary>& vocabulary);

void write_stats(const DatasetStats& stats, std::ostream& out);

// Unix time of an ISO-8601 UTC instant such as `2014-04-07T10:51:09.277Z`;
// fractional seconds are discarded. Plain `YYYY-MM-DD` dates map to midnight.
std::optional<Timestamp> parse_iso8601(std::string_view text);

// Midnight (UTC) starting the day containing `t`.
Timestamp day_start(Timestamp t);

}  // namespace sbr
