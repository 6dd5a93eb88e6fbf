// Match-event tables and the home-away difference pipeline.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dynamo/errors.hpp"
#include "dynamo/time_series.hpp"

namespace dynamo {

// One row per (team, match, minute) with the per-minute statistic values.
struct MatchEventTable {
  struct Row {
    std::string team_id;
    std::string match_id;
    int minute = 0;  // 1..90+, values past 90 are added time
    bool is_home = false;
    Eigen::VectorXd stats;
  };

  std::vector<std::string> stat_names;
  std::vector<Row> rows;

  void validate() const {
    std::set<std::tuple<std::string, std::string, int>> keys;
    std::map<std::pair<std::string, std::string>, bool> home_flag;
    for (const auto& r : rows) {
      if (r.minute < 1) {
        throw DataError("minute must be >= 1 (team " + r.team_id + ", match " +
                        r.match_id + ")");
      }
      if (static_cast<std::size_t>(r.stats.size()) != stat_names.size()) {
        throw DataError("stat count mismatch in event row");
      }
      if (!r.stats.allFinite()) {
        throw DataError("non-finite stat value (team " + r.team_id +
                        ", match " + r.match_id + ", minute " +
                        std::to_string(r.minute) + ")");
      }
      if (!keys.insert({r.team_id, r.match_id, r.minute}).second) {
        throw DataError("duplicate (team, match, minute) key: " + r.team_id +
                        ", " + r.match_id + ", " + std::to_string(r.minute));
      }
      auto [it, inserted] = home_flag.insert({{r.team_id, r.match_id}, r.is_home});
      if (!inserted && it->second != r.is_home) {
        throw DataError("is_home flag is not constant within match " +
                        r.match_id + " for team " + r.team_id);
      }
    }
  }
};

// Columns: team_id, match_id, minute, is_home (0/1), then one per statistic.
inline MatchEventTable load_event_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);

  MatchEventTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (lineno == 1) {
      if (cells.size() < 5) {
        throw DataError("event CSV needs team_id, match_id, minute, is_home "
                        "and at least one statistic column");
      }
      for (std::size_t j = 4; j < cells.size(); ++j) {
        table.stat_names.push_back(detail::trim(cells[j]));
      }
      continue;
    }
    if (cells.size() != table.stat_names.size() + 4) {
      throw DataError("ragged event row at line " + std::to_string(lineno));
    }
    MatchEventTable::Row row;
    row.team_id = detail::trim(cells[0]);
    row.match_id = detail::trim(cells[1]);
    const double minute_value = detail::parse_cell(cells[2], lineno, 3);
    if (minute_value != std::floor(minute_value)) {
      throw DataError("minute must be an integer at line " +
                      std::to_string(lineno));
    }
    row.minute = static_cast<int>(minute_value);
    const double home = detail::parse_cell(cells[3], lineno, 4);
    if (home != 0.0 && home != 1.0) {
      throw DataError("is_home must be 0 or 1 at line " + std::to_string(lineno));
    }
    row.is_home = home == 1.0;
    row.stats.resize(static_cast<Eigen::Index>(table.stat_names.size()));
    for (std::size_t j = 0; j < table.stat_names.size(); ++j) {
      row.stats(static_cast<Eigen::Index>(j)) =
          detail::parse_cell(cells[4 + j], lineno, 5 + j);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw DataError("no event rows in " + path);
  table.validate();
  return table;
}

struct EventOptions {
  // Clamp minutes past 90 into minute 90 instead of dropping them.
  bool bin_added_time = false;
  // Error on a (match, minute) with no row instead of imputing 0.
  bool strict_missing = false;
};

// Per-minute mean home-away difference for one team:
//   X_t = (2/N) * sum_j sign_j * stats_t^{j},  sign = +1 home, -1 away,
// over the team's N matches, minutes 1..90. Missing minutes count as zero
// events unless strict_missing is set.
inline TimeSeriesMatrix home_away_difference(const MatchEventTable& events,
                                             const std::string& team,
                                             const EventOptions& opts = {}) {
  events.validate();
  const auto d = static_cast<Eigen::Index>(events.stat_names.size());

  // match_id -> (is_home, 90 x d accumulated stats, minutes seen)
  struct MatchAcc {
    bool is_home = false;
    Eigen::MatrixXd stats;
    std::set<int> minutes;
  };
  std::map<std::string, MatchAcc> matches;
  for (const auto& r : events.rows) {
    if (r.team_id != team) continue;
    int minute = r.minute;
    if (minute > 90) {
      if (!opts.bin_added_time) continue;
      minute = 90;
    }
    auto& acc = matches[r.match_id];
    if (acc.stats.size() == 0) {
      acc.stats = Eigen::MatrixXd::Zero(90, d);
      acc.is_home = r.is_home;
    }
    acc.stats.row(minute - 1) += r.stats;  // += so binned added time stacks
    acc.minutes.insert(minute);
  }
  if (matches.empty()) {
    throw DataError("team '" + team + "' has no matches in the event table");
  }
  if (opts.strict_missing) {
    for (const auto& [match_id, acc] : matches) {
      for (int m = 1; m <= 90; ++m) {
        if (!acc.minutes.count(m)) {
          throw DataError("missing minute " + std::to_string(m) +
                          " for team '" + team + "', match '" + match_id + "'");
        }
      }
    }
  }

  const double n_matches = static_cast<double>(matches.size());
  TimeSeriesMatrix series;
  series.values = Eigen::MatrixXd::Zero(90, d);
  for (const auto& [match_id, acc] : matches) {
    series.values += (acc.is_home ? 1.0 : -1.0) * acc.stats;
  }
  series.values *= 2.0 / n_matches;
  series.variable_names = events.stat_names;
  series.validate();
  return series;
}

}  // namespace dynamo
