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

#include "sbr/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <unordered_set>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "sbr/error.hpp"
#include "sbr/text.hpp"

namespace sbr {

RawFormat parse_raw_format(std::string_view tag) {
  if (tag == "rsc15") return RawFormat::kRsc15;
  if (tag == "digi") return RawFormat::kDigi;
  if (tag == "retail") return RawFormat::kRetail;
  throw InputError(fmt::format("unknown dataset format '{}'", tag));
}

std::string_view to_string(RawFormat format) {
  switch (format) {
    case RawFormat::kRsc15:
      return "rsc15";
    case RawFormat::kDigi:
      return "digi";
    case RawFormat::kRetail:
      return "retail";
  }
  return "?";
}

ItemId Vocabulary::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<ItemId>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<ItemId> Vocabulary::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<ItemId> Session::items() const {
  std::vector<ItemId> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(e.item);
  return out;
}

Session make_session(std::string session_id, std::vector<Click> events) {
  Session s;
  s.session_id = std::move(session_id);
  s.events = std::move(events);
  if (!s.events.empty()) {
    s.start_time = s.events.front().time;
    s.end_time = s.events.back().time;
    for (const auto& e : s.events) {
      s.start_time = std::min(s.start_time, e.time);
      s.end_time = std::max(s.end_time, e.time);
    }
  }
  return s;
}

SessionDataset::SessionDataset(
    std::vector<Session> sessions, std::shared_ptr<const Vocabulary> vocabulary,
    std::shared_ptr<const std::unordered_map<ItemId, std::string>> categories)
    : sessions_(std::move(sessions)),
      vocabulary_(std::move(vocabulary)),
      categories_(std::move(categories)) {
  if (!vocabulary_) vocabulary_ = std::make_shared<Vocabulary>();
  std::stable_sort(sessions_.begin(), sessions_.end(),
                   [](const Session& a, const Session& b) {
                     if (a.start_time != b.start_time)
                       return a.start_time < b.start_time;
                     return a.session_id < b.session_id;
                   });
  popularity_.assign(vocabulary_->size(), 0);
  for (const auto& s : sessions_) {
    for (const auto& e : s.events) {
      if (e.item >= popularity_.size()) popularity_.resize(e.item + 1, 0);
      ++popularity_[e.item];
    }
  }
  for (auto count : popularity_) {
    if (count > 0) ++catalog_size_;
    max_popularity_ = std::max(max_popularity_, count);
  }
}

std::size_t SessionDataset::click_count() const {
  std::size_t n = 0;
  for (const auto& s : sessions_) n += s.size();
  return n;
}

SessionDataset SessionDataset::with_sessions(
    std::vector<Session> sessions) const {
  return SessionDataset(std::move(sessions), vocabulary_, categories_);
}

// ---------------------------------------------------------------------------
// Dates

namespace {

std::optional<int> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace

std::optional<Timestamp> parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = parse_digits(text.substr(0, 4));
  auto mo = parse_digits(text.substr(5, 2));
  auto d = parse_digits(text.substr(8, 2));
  if (!y || !mo || !d) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp t = sys_days{ymd}.time_since_epoch() / seconds{1};
  if (text.size() == 10) return t;

  if (text[10] != 'T' && text[10] != ' ') return std::nullopt;
  if (text.size() < 19 || text[13] != ':' || text[16] != ':')
    return std::nullopt;
  auto h = parse_digits(text.substr(11, 2));
  auto mi = parse_digits(text.substr(14, 2));
  auto se = parse_digits(text.substr(17, 2));
  if (!h || !mi || !se || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;
  std::string_view rest = text.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    std::size_t i = 1;
    while (i < rest.size() && rest[i] >= '0' && rest[i] <= '9') ++i;
    if (i == 1) return std::nullopt;
    rest.remove_prefix(i);
  }
  if (!rest.empty() && rest != "Z") return std::nullopt;
  return t + *h * 3600 + *mi * 60 + *se;
}

Timestamp day_start(Timestamp t) {
  Timestamp q = t / kSecondsPerDay;
  if (t % kSecondsPerDay < 0) --q;
  return q * kSecondsPerDay;
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

[[noreturn]] void malformed(const std::string& source, std::size_t line,
                            const std::string& why) {
  throw InputError(fmt::format("{}:{}: malformed row: {}", source, line, why));
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

void ingest_rsc15(std::istream& in, const std::string& source,
                  std::vector<InteractionEvent>& out) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 4) malformed(source, lineno, "expected 4 fields");
    auto ts = parse_iso8601(f[1]);
    if (!ts || *ts <= 0) malformed(source, lineno, "bad timestamp");
    if (f[0].empty() || f[2].empty()) malformed(source, lineno, "empty id");
    InteractionEvent e{std::string(f[0]), std::string(f[2]), *ts, std::nullopt};
    if (!f[3].empty()) e.category_id = std::string(f[3]);
    out.push_back(std::move(e));
  }
}

void ingest_digi(std::istream& in, const std::string& source,
                 std::vector<InteractionEvent>& out) {
  std::string line;
  std::size_t lineno = 0;
  struct Row {
    InteractionEvent event;
    std::int64_t timeframe;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (lineno == 1) {
      if (line.rfind("sessionId;", 0) != 0)
        malformed(source, lineno, "missing digi header");
      continue;
    }
    if (line.empty()) continue;
    auto f = split(line, ';');
    if (f.size() != 5) malformed(source, lineno, "expected 5 fields");
    auto frame = parse_number<std::int64_t>(f[3]);
    auto date = parse_iso8601(f[4]);
    if (!frame || *frame < 0) malformed(source, lineno, "bad timeframe");
    if (!date || f[4].size() != 10) malformed(source, lineno, "bad eventdate");
    if (f[0].empty() || f[2].empty()) malformed(source, lineno, "empty id");
    const Timestamp ts = *date + *frame / 1000;
    if (ts <= 0) malformed(source, lineno, "non-positive timestamp");
    rows.push_back(
        {{std::string(f[0]), std::string(f[2]), ts, std::nullopt}, *frame});
  }
  // Within a session, order by timeframe; keep file order otherwise.
  std::unordered_map<std::string, std::size_t> first_seen;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [it, inserted] =
        first_seen.try_emplace(rows[i].event.session_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  out.reserve(out.size() + rows.size());
  for (auto& g : groups) {
    std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) {
      return rows[a].timeframe < rows[b].timeframe;
    });
    for (auto i : g) out.push_back(std::move(rows[i].event));
  }
}

void ingest_retail(std::istream& in, const std::string& source,
                   Timestamp gap, std::vector<InteractionEvent>& out) {
  std::string line;
  std::size_t lineno = 0;
  struct View {
    Timestamp time;
    std::string item;
  };
  std::unordered_map<std::string, std::size_t> visitor_index;
  std::vector<std::pair<std::string, std::vector<View>>> visitors;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (lineno == 1) {
      if (line.rfind("timestamp,", 0) != 0)
        malformed(source, lineno, "missing retail header");
      continue;
    }
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 5) malformed(source, lineno, "expected 5 fields");
    auto ms = parse_number<std::int64_t>(f[0]);
    if (!ms || *ms / 1000 <= 0) malformed(source, lineno, "bad timestamp");
    if (f[1].empty() || f[3].empty()) malformed(source, lineno, "empty id");
    if (f[2] != "view" && f[2] != "addtocart" && f[2] != "transaction")
      malformed(source, lineno, "unknown event type");
    if (f[2] != "view") continue;
    auto [it, inserted] =
        visitor_index.try_emplace(std::string(f[1]), visitors.size());
    if (inserted) visitors.emplace_back(std::string(f[1]), std::vector<View>{});
    visitors[it->second].second.push_back({*ms / 1000, std::string(f[3])});
  }
  for (auto& [visitor, views] : visitors) {
    std::stable_sort(views.begin(), views.end(),
                     [](const View& a, const View& b) { return a.time < b.time; });
    std::size_t visit = 0;
    for (std::size_t i = 0; i < views.size(); ++i) {
      if (i > 0 && views[i].time - views[i - 1].time > gap) ++visit;
      out.push_back({fmt::format("{}_{}", visitor, visit), views[i].item,
                     views[i].time, std::nullopt});
    }
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

std::vector<InteractionEvent> ingest(std::istream& in, RawFormat format,
                                     const IngestOptions& options,
                                     const std::string& source) {
  std::vector<InteractionEvent> events;
  switch (format) {
    case RawFormat::kRsc15:
      ingest_rsc15(in, source, events);
      break;
    case RawFormat::kDigi:
      ingest_digi(in, source, events);
      break;
    case RawFormat::kRetail:
      ingest_retail(in, source, options.retail_gap, events);
      break;
  }
  if (events.empty())
    throw InputError(fmt::format("{}: no events found", source));
  return events;
}

std::vector<InteractionEvent> ingest(const std::filesystem::path& path,
                                     RawFormat format,
                                     const IngestOptions& options) {
  auto in = open_input(path);
  return ingest(in, format, options, path.string());
}

std::unordered_map<std::string, std::string> ingest_categories(
    const std::filesystem::path& path, RawFormat format) {
  auto in = open_input(path);
  std::unordered_map<std::string, std::string> map;
  std::unordered_map<std::string, std::int64_t> stamp;
  std::string line;
  std::size_t lineno = 0;
  const std::string source = path.string();
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (lineno == 1 || line.empty()) continue;
    if (format == RawFormat::kDigi) {
      auto f = split(line, ';');
      if (f.size() != 2) malformed(source, lineno, "expected itemId;categoryId");
      map[std::string(f[0])] = std::string(f[1]);
    } else if (format == RawFormat::kRetail) {
      auto f = split(line, ',');
      if (f.size() != 4) malformed(source, lineno, "expected 4 fields");
      if (f[2] != "categoryid") continue;
      auto ts = parse_number<std::int64_t>(f[0]);
      if (!ts) malformed(source, lineno, "bad timestamp");
      auto key = std::string(f[1]);
      auto it = stamp.find(key);
      if (it == stamp.end() || it->second <= *ts) {
        stamp[key] = *ts;
        map[key] = std::string(f[3]);
      }
    } else {
      throw InputError("rsc15 carries categories inline; no side file");
    }
  }
  return map;
}

void attach_categories(
    std::vector<InteractionEvent>& events,
    const std::unordered_map<std::string, std::string>& map) {
  for (auto& e : events) {
    auto it = map.find(e.item_id);
    if (it != map.end()) e.category_id = it->second;
  }
}

// ---------------------------------------------------------------------------
// Preprocessing

SessionDataset preprocess(const std::vector<InteractionEvent>& events,
                          const PreprocessOptions& options) {
  if (events.empty()) throw InputError("preprocess: no events");

  std::unordered_map<std::string_view, std::size_t> support;
  for (const auto& e : events) ++support[e.item_id];

  struct Pending {
    std::string_view id;
    std::vector<const InteractionEvent*> events;
  };
  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<Pending> groups;
  for (const auto& e : events) {
    if (support[e.item_id] < options.min_item_support) continue;
    auto [it, inserted] = index.try_emplace(e.session_id, groups.size());
    if (inserted) groups.push_back({e.session_id, {}});
    groups[it->second].events.push_back(&e);
  }

  struct Kept {
    std::string_view id;
    std::vector<const InteractionEvent*> events;
    Timestamp start;
  };
  std::vector<Kept> kept;
  for (auto& g : groups) {
    if (g.events.size() < options.min_session_length) continue;
    std::stable_sort(g.events.begin(), g.events.end(),
                     [](auto* a, auto* b) { return a->timestamp < b->timestamp; });
    const Timestamp start = g.events.front()->timestamp;
    kept.push_back({g.id, std::move(g.events), start});
  }
  if (kept.empty())
    throw InputError("preprocess: every event was filtered out");
  std::stable_sort(kept.begin(), kept.end(), [](const Kept& a, const Kept& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.id < b.id;
  });

  // Ids are assigned in order of first appearance in the sorted dataset.
  auto vocabulary = std::make_shared<Vocabulary>();
  auto categories = std::make_shared<std::unordered_map<ItemId, std::string>>();
  std::vector<Session> sessions;
  sessions.reserve(kept.size());
  for (const auto& k : kept) {
    std::vector<Click> clicks;
    clicks.reserve(k.events.size());
    for (const auto* e : k.events) {
      const ItemId id = vocabulary->intern(e->item_id);
      clicks.push_back({id, e->timestamp});
      if (e->category_id) (*categories)[id] = *e->category_id;
    }
    sessions.push_back(make_session(std::string(k.id), std::move(clicks)));
  }
  return SessionDataset(std::move(sessions), std::move(vocabulary),
                        std::move(categories));
}

SessionDataset temporal_fraction(const SessionDataset& dataset,
                                 std::size_t denominator) {
  if (denominator == 0)
    throw ArgumentError("temporal_fraction: denominator must be >= 1");
  const auto& all = dataset.sessions();
  if (all.empty()) return dataset;
  if (denominator > all.size()) {
    std::cerr << fmt::format(
        "warning: fraction 1/{} exceeds the {} available sessions; keeping "
        "only the most recent one\n",
        denominator, all.size());
  }
  const std::size_t keep = (all.size() + denominator - 1) / denominator;
  std::vector<Session> recent(all.end() - static_cast<std::ptrdiff_t>(keep),
                              all.end());
  return dataset.with_sessions(std::move(recent));
}

TrainTestSplit split_by_days(const SessionDataset& dataset,
                             std::size_t test_days) {
  if (dataset.empty()) throw InputError("split_by_days: empty dataset");
  Timestamp latest = dataset.sessions().front().end_time;
  for (const auto& s : dataset.sessions()) latest = std::max(latest, s.end_time);
  const Timestamp boundary =
      day_start(latest) + kSecondsPerDay -
      static_cast<Timestamp>(test_days) * kSecondsPerDay;

  std::vector<Session> train, test;
  for (const auto& s : dataset.sessions()) {
    (s.start_time < boundary ? train : test).push_back(s);
  }
  if (train.empty())
    throw InputError(fmt::format(
        "split_by_days: no training sessions before the {}-day test window",
        test_days));
  SessionDataset train_set = dataset.with_sessions(std::move(train));

  std::vector<Session> pruned;
  for (auto& s : test) {
    std::vector<Click> clicks;
    for (const auto& c : s.events) {
      if (train_set.contains(c.item)) clicks.push_back(c);
    }
    if (clicks.size() < 2) continue;
    pruned.push_back(make_session(std::move(s.session_id), std::move(clicks)));
  }
  if (pruned.empty())
    throw InputError("split_by_days: no test sessions left after pruning");
  return {std::move(train_set), dataset.with_sessions(std::move(pruned)),
          boundary};
}

DatasetStats compute_stats(const SessionDataset& dataset) {
  DatasetStats stats;
  stats.sessions = dataset.size();
  stats.clicks = dataset.click_count();
  stats.items = dataset.catalog_size();
  if (const auto& cats = dataset.category_map()) {
    std::unordered_set<std::string_view> seen;
    for (const auto& [item, category] : *cats) {
      if (dataset.contains(item)) seen.insert(category);
    }
    stats.categories = seen.size();
  }
  stats.avg_session_length =
      stats.sessions == 0 ? 0.0
                          : static_cast<double>(stats.clicks) /
                                static_cast<double>(stats.sessions);
  return stats;
}

// ---------------------------------------------------------------------------
// Normalized files

void write_normalized(const SessionDataset& dataset, std::ostream& out) {
  out << "session_id,item_id,time,category\n";
  const auto& vocab = dataset.vocabulary();
  const auto& cats = dataset.category_map();
  for (const auto& s : dataset.sessions()) {
    for (const auto& c : s.events) {
      std::string_view category;
      if (cats) {
        auto it = cats->find(c.item);
        if (it != cats->end()) category = it->second;
      }
      fmt::print(out, "{},{},{},{}\n", s.session_id, vocab.name(c.item), c.time,
                 category);
    }
  }
}

void write_normalized(const SessionDataset& dataset,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  write_normalized(dataset, out);
}

SessionDataset read_normalized(std::istream& in,
                               const std::shared_ptr<Vocabulary>& vocabulary,
                               const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  auto categories = std::make_shared<std::unordered_map<ItemId, std::string>>();
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::pair<std::string, std::vector<Click>>> groups;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (lineno == 1) {
      if (line != "session_id,item_id,time,category")
        malformed(source, lineno, "missing normalized header");
      continue;
    }
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 4) malformed(source, lineno, "expected 4 fields");
    auto t = parse_number<Timestamp>(f[2]);
    if (!t || *t <= 0) malformed(source, lineno, "bad time");
    if (f[0].empty() || f[1].empty()) malformed(source, lineno, "empty id");
    const ItemId item = vocabulary->intern(f[1]);
    if (!f[3].empty()) (*categories)[item] = std::string(f[3]);
    auto [it, inserted] = index.try_emplace(std::string(f[0]), groups.size());
    if (inserted) groups.emplace_back(std::string(f[0]), std::vector<Click>{});
    groups[it->second].second.push_back({item, *t});
  }
  std::vector<Session> sessions;
  sessions.reserve(groups.size());
  for (auto& [id, clicks] : groups) {
    std::stable_sort(clicks.begin(), clicks.end(),
                     [](const Click& a, const Click& b) { return a.time < b.time; });
    sessions.push_back(make_session(std::move(id), std::move(clicks)));
  }
  return SessionDataset(std::move(sessions), vocabulary, std::move(categories));
}

SessionDataset read_normalized(const std::filesystem::path& path,
                               const std::shared_ptr<Vocabulary>& vocabulary) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw MissingArtifactError(fmt::format("cannot open '{}'", path.string()));
  return read_normalized(in, vocabulary, path.string());
}

void write_stats(const DatasetStats& stats, std::ostream& out) {
  out << "clicks,items,categories,sessions,avg_session_length\n";
  fmt::print(out, "{},{},{},{},{:.2f}\n", stats.clicks, stats.items,
             stats.categories, stats.sessions, stats.avg_session_length);
}

}  // namespace sbr
