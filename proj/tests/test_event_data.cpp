#include <catch2/catch_amalgamated.hpp>

#include "dynamo/event_data.hpp"

using namespace dynamo;

namespace {

MatchEventTable::Row make_row(const std::string& team, const std::string& match,
                              int minute, bool home, double value) {
  MatchEventTable::Row row;
  row.team_id = team;
  row.match_id = match;
  row.minute = minute;
  row.is_home = home;
  row.stats.resize(1);
  row.stats << value;
  return row;
}

}  // namespace

TEST_CASE("difference formula with one home and one away match") {
  MatchEventTable events;
  events.stat_names = {"shots"};
  events.rows.push_back(make_row("t1", "m1", 5, true, 3.0));
  events.rows.push_back(make_row("t1", "m2", 5, false, 1.0));
  const TimeSeriesMatrix series = home_away_difference(events, "t1");
  REQUIRE(series.rows() == 90);
  CHECK(series.values(4, 0) == Catch::Approx(2.0));  // (2/2)(3-1)
  CHECK(series.values(10, 0) == 0.0);                // imputed zero counts
}

TEST_CASE("all-home schedule still evaluates the formula") {
  MatchEventTable events;
  events.stat_names = {"passes"};
  events.rows.push_back(make_row("t1", "m1", 7, true, 4.0));
  events.rows.push_back(make_row("t1", "m2", 7, true, 2.0));
  const TimeSeriesMatrix series = home_away_difference(events, "t1");
  CHECK(series.values(6, 0) == Catch::Approx((2.0 / 2.0) * (4.0 + 2.0)));
}

TEST_CASE("minutes beyond 90 are excluded by default, binned on request") {
  MatchEventTable events;
  events.stat_names = {"shots"};
  events.rows.push_back(make_row("t1", "m1", 90, true, 1.0));
  events.rows.push_back(make_row("t1", "m1", 93, true, 5.0));
  const TimeSeriesMatrix dropped = home_away_difference(events, "t1");
  CHECK(dropped.values(89, 0) == Catch::Approx(2.0 * 1.0));
  EventOptions opts;
  opts.bin_added_time = true;
  const TimeSeriesMatrix binned = home_away_difference(events, "t1", opts);
  CHECK(binned.values(89, 0) == Catch::Approx(2.0 * 6.0));
}

TEST_CASE("output is antisymmetric in the home flag") {
  MatchEventTable events;
  events.stat_names = {"a", "b"};
  auto add = [&](const std::string& match, int minute, bool home, double v1,
                 double v2) {
    MatchEventTable::Row row;
    row.team_id = "t";
    row.match_id = match;
    row.minute = minute;
    row.is_home = home;
    row.stats.resize(2);
    row.stats << v1, v2;
    events.rows.push_back(row);
  };
  add("m1", 1, true, 1.0, 0.5);
  add("m1", 44, true, -2.0, 3.0);
  add("m2", 1, false, 4.0, 1.5);
  add("m3", 88, true, 0.25, -1.0);
  const TimeSeriesMatrix base = home_away_difference(events, "t");
  MatchEventTable flipped = events;
  for (auto& row : flipped.rows) row.is_home = !row.is_home;
  const TimeSeriesMatrix negated = home_away_difference(flipped, "t");
  CHECK((base.values + negated.values).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(base.rows() == 90);
}

TEST_CASE("unknown team and strict missing minutes") {
  MatchEventTable events;
  events.stat_names = {"a"};
  events.rows.push_back(make_row("t1", "m1", 5, true, 1.0));
  CHECK_THROWS_AS(home_away_difference(events, "nobody"), DataError);
  EventOptions strict;
  strict.strict_missing = true;
  CHECK_THROWS_AS(home_away_difference(events, "t1", strict), DataError);
}

TEST_CASE("duplicate keys and inconsistent home flags are rejected") {
  MatchEventTable events;
  events.stat_names = {"a"};
  events.rows.push_back(make_row("t1", "m1", 5, true, 1.0));
  events.rows.push_back(make_row("t1", "m1", 5, true, 2.0));
  CHECK_THROWS_AS(events.validate(), DataError);

  MatchEventTable mixed;
  mixed.stat_names = {"a"};
  mixed.rows.push_back(make_row("t1", "m1", 5, true, 1.0));
  mixed.rows.push_back(make_row("t1", "m1", 6, false, 2.0));
  CHECK_THROWS_AS(mixed.validate(), DataError);
}

TEST_CASE("event CSV parsing") {
  const std::string path = "events_test.csv";
  {
    std::ofstream out(path);
    out << "team_id,match_id,minute,is_home,shots,passes\n";
    out << "t1,m1,5,1,3,10\n";
    out << "t1,m2,5,0,1,8\n";
  }
  const MatchEventTable table = load_event_csv(path);
  CHECK(table.stat_names == std::vector<std::string>{"shots", "passes"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].is_home);
  CHECK(table.rows[1].minute == 5);
  const TimeSeriesMatrix series = home_away_difference(table, "t1");
  CHECK(series.values(4, 0) == Catch::Approx(2.0));
  CHECK(series.values(4, 1) == Catch::Approx(2.0));
  std::remove(path.c_str());
}
