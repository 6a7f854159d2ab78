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
#include <functional>
#include <istream>

#include <fmt/core.h>

#include "sbr/error.hpp"
#include "sbr/eval.hpp"
#include "sbr/text.hpp"

namespace sbr {

std::string results_header(std::span<const std::size_t> cutoffs) {
  std::string h = "model";
  for (auto k : cutoffs) h += fmt::format(",mrr@{}", k);
  for (auto k : cutoffs) h += fmt::format(",hr@{}", k);
  const std::size_t top = cutoffs.empty() ? 0 : cutoffs.back();
  h += fmt::format(",cov@{},pop@{},t_time_min,p_time_ms,events,seed,config_hash",
                   top, top);
  return h;
}

std::string format_result_row(const ResultRow& row) {
  std::string s = row.model;
  for (const auto& c : row.metrics.per_cutoff) s += fmt::format(",{:.6f}", c.mrr);
  for (const auto& c : row.metrics.per_cutoff) s += fmt::format(",{:.6f}", c.hr);
  s += fmt::format(",{:.6f},{:.6f},{:.6f},{:.6f},{},{},{}", row.metrics.cov,
                   row.metrics.pop, row.timing.train_time_min,
                   row.timing.mean_predict_ms, row.metrics.event_count, row.seed,
                   row.config_hash);
  return s;
}

namespace {

double to_double(std::string_view s) {
  const std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size())
    throw InputError(fmt::format("results: bad number '{}'", s));
  return v;
}

std::uint64_t to_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError(fmt::format("results: bad integer '{}'", s));
  return v;
}

std::size_t cutoff_of(std::string_view column, std::string_view prefix) {
  if (column.substr(0, prefix.size()) != prefix)
    throw InputError(fmt::format("results: unexpected column '{}'", column));
  return to_u64(column.substr(prefix.size()));
}

}  // namespace

std::vector<ResultRow> read_results(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  strip_cr(line);
  const auto header = split(line, ',');
  // model, n x mrr, n x hr, cov, pop, t, p, events, seed, hash
  if (header.size() < 8 || (header.size() - 8) % 2 != 0 || header[0] != "model")
    throw InputError("results: unrecognized header");
  const std::size_t n = (header.size() - 8) / 2;
  std::vector<std::size_t> cutoffs;
  for (std::size_t i = 0; i < n; ++i) {
    cutoffs.push_back(cutoff_of(header[1 + i], "mrr@"));
    if (cutoff_of(header[1 + n + i], "hr@") != cutoffs.back())
      throw InputError("results: mrr/hr cutoffs differ");
  }
  const std::size_t cov_k = cutoff_of(header[1 + 2 * n], "cov@");
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size())
      throw InputError(fmt::format("results: row has {} fields, expected {}",
                                   f.size(), header.size()));
    ResultRow r;
    r.model = std::string(f[0]);
    for (std::size_t i = 0; i < n; ++i) {
      r.metrics.per_cutoff.push_back(
          {cutoffs[i], to_double(f[1 + i]), to_double(f[1 + n + i])});
    }
    std::size_t p = 1 + 2 * n;
    r.metrics.coverage_cutoff = cov_k;
    r.metrics.cov = to_double(f[p++]);
    r.metrics.pop = to_double(f[p++]);
    r.timing.train_time_min = to_double(f[p++]);
    r.timing.mean_predict_ms = to_double(f[p++]);
    r.metrics.event_count = to_u64(f[p++]);
    r.seed = to_u64(f[p++]);
    r.config_hash = std::string(f[p++]);
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

// *best*, _runner-up_; ties share a marker.
std::vector<std::string> mark_column(const std::vector<double>& values,
                                     bool higher_is_better, int precision) {
  std::vector<double> distinct = values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (higher_is_better) std::reverse(distinct.begin(), distinct.end());
  std::vector<std::string> out;
  for (double v : values) {
    std::string text = fmt::format("{:.{}f}", v, precision);
    if (!distinct.empty() && v == distinct[0]) {
      text = "*" + text + "*";
    } else if (distinct.size() > 1 && v == distinct[1]) {
      text = "_" + text + "_";
    }
    out.push_back(std::move(text));
  }
  return out;
}

std::string render_table(const std::vector<std::string>& headers,
                         const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    width[c] = headers[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  const auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += c == 0 ? fmt::format("{:<{}}", row[c], width[c])
                    : fmt::format("  {:>{}}", row[c], width[c]);
    }
    out += '\n';
  };
  line(headers);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total - 2, '-') + '\n';
  for (const auto& row : cells) line(row);
  return out;
}

}  // namespace

std::string render_report(std::string_view title,
                          const std::vector<ResultRow>& all_rows) {
  // Latest row per model.
  std::vector<ResultRow> rows;
  for (const auto& r : all_rows) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const ResultRow& x) { return x.model == r.model; });
    if (it == rows.end()) {
      rows.push_back(r);
    } else {
      *it = r;
    }
  }
  std::string out = fmt::format("== {} ==\n", title);
  if (rows.empty()) {
    out += "(no results)\n";
    return out;
  }
  const auto& cutoffs_of = rows.front().metrics.per_cutoff;
  const std::size_t sort_k = cutoffs_of.back().cutoff;
  std::stable_sort(rows.begin(), rows.end(), [&](const ResultRow& a, const ResultRow& b) {
    return a.metrics.mrr(sort_k) > b.metrics.mrr(sort_k);
  });

  std::vector<std::string> headers{"Model"};
  std::vector<std::vector<double>> columns;
  for (const auto& c : cutoffs_of) {
    headers.push_back(fmt::format("MRR@{}", c.cutoff));
    columns.emplace_back();
    for (const auto& r : rows) columns.back().push_back(r.metrics.mrr(c.cutoff));
  }
  for (const auto& c : cutoffs_of) {
    headers.push_back(fmt::format("HR@{}", c.cutoff));
    columns.emplace_back();
    for (const auto& r : rows) columns.back().push_back(r.metrics.hr(c.cutoff));
  }
  std::vector<std::vector<std::string>> cells(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) cells[i].push_back(rows[i].model);
  for (const auto& col : columns) {
    const auto marked = mark_column(col, true, 3);
    for (std::size_t i = 0; i < rows.size(); ++i) cells[i].push_back(marked[i]);
  }
  out += fmt::format("Accuracy, sorted by MRR@{}\n", sort_k);
  out += render_table(headers, cells);

  const std::size_t ck = rows.front().metrics.coverage_cutoff;
  std::vector<std::string> h2{"Model", fmt::format("Cov@{}", ck),
                              fmt::format("Pop@{}", ck), "T-Time (m)",
                              "P-Time (ms)"};
  std::vector<double> cov, pop, tt, pt;
  for (const auto& r : rows) {
    cov.push_back(r.metrics.cov);
    pop.push_back(r.metrics.pop);
    tt.push_back(r.timing.train_time_min);
    pt.push_back(r.timing.mean_predict_ms);
  }
  const auto mc = mark_column(cov, true, 3);
  const auto mp = mark_column(pop, false, 3);
  const auto mt = mark_column(tt, false, 3);
  const auto mq = mark_column(pt, false, 3);
  std::vector<std::vector<std::string>> cells2;
  for (std::size_t i = 0; i < rows.size(); ++i)
    cells2.push_back({rows[i].model, mc[i], mp[i], mt[i], mq[i]});
  out += "\nBeyond accuracy\n";
  out += render_table(h2, cells2);
  return out;
}

}  // namespace sbr
