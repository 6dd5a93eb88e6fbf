#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "dynamo/serialize.hpp"

#ifndef DYNAMO_CLI_PATH
#define DYNAMO_CLI_PATH "dynamo"
#endif

namespace {

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(DYNAMO_CLI_PATH) + " " + args + " > cli_stdout.txt 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

bool file_exists(const std::string& path) {
  std::ifstream in(path);
  return static_cast<bool>(in);
}

struct Cleanup {
  std::vector<std::string> paths;
  ~Cleanup() {
    for (const auto& p : paths) std::remove(p.c_str());
    std::remove("cli_stdout.txt");
  }
};

}  // namespace

TEST_CASE("simulate then cv, fit, eval and predict end to end") {
  Cleanup cleanup;
  cleanup.paths = {"e2e_data.csv",     "e2e_data.csv.manifest.json",
                   "e2e_truth.json",   "e2e_cv.json",
                   "e2e_cv.json.manifest.json",
                   "e2e_fits.json",    "e2e_fits.json.manifest.json",
                   "e2e_report.json",  "e2e_report.json.manifest.json",
                   "e2e_mse.json",     "e2e_mse.json.manifest.json"};

  REQUIRE(run_cli("simulate --d 4 --T 120 --seed 11 --out e2e_data.csv "
                  "--truth e2e_truth.json") == 0);
  REQUIRE(file_exists("e2e_data.csv"));
  REQUIRE(file_exists("e2e_truth.json"));
  REQUIRE(file_exists("e2e_data.csv.manifest.json"));

  REQUIRE(run_cli("cv --input e2e_data.csv --t 60 --grid 0.3,0.9 --folds 5 "
                  "--seed 3 --eta-tol 1e-3 --out e2e_cv.json") == 0);
  const dynamo::Json cv = dynamo::read_json_file("e2e_cv.json");
  const double chosen = cv.at("results")[0].at("chosen").get<double>();
  CHECK((chosen == 0.3 || chosen == 0.9));

  REQUIRE(run_cli("fit --input e2e_data.csv --t 30,60,90 --lag 1 "
                  "--kernel epanechnikov --bandwidth " +
                  std::to_string(chosen) +
                  " --eta-tol 1e-3 --threshold 0.05 --jobs 2 "
                  "--out e2e_fits.json") == 0);
  const dynamo::LoadedFits fits = dynamo::load_fits("e2e_fits.json");
  REQUIRE(fits.fits.size() == 3);
  CHECK(fits.fits[1].t == 60);

  REQUIRE(run_cli("eval --est e2e_fits.json --truth e2e_truth.json "
                  "--threshold 0.05 --out e2e_report.json") == 0);
  const dynamo::Json report = dynamo::read_json_file("e2e_report.json");
  REQUIRE(report.at("results").size() == 3);
  const auto& first = report.at("results")[0];
  CHECK(first.at("instantaneous").contains("shd"));
  CHECK(first.at("instantaneous").contains("f1"));
  CHECK(first.at("instantaneous").contains("precision"));
  CHECK(first.at("instantaneous").contains("recall"));
  CHECK(first.at("lagged").contains("shd"));
  CHECK(report.at("summary").at("instantaneous").contains("median_f1"));

  REQUIRE(run_cli("predict --fits e2e_fits.json --input e2e_data.csv "
                  "--target v2 --out e2e_mse.json") == 0);
  const dynamo::Json mse = dynamo::read_json_file("e2e_mse.json");
  CHECK(mse.at("mse").get<double>() >= 0.0);
  CHECK(mse.at("target") == "v2");
}

TEST_CASE("usage and data errors map to exit codes 1 and 2") {
  Cleanup cleanup;
  cleanup.paths = {"missing_out.json"};
  CHECK(run_cli("fit --t 5 --out missing_out.json") == 1);  // no --input
  CHECK(run_cli("definitely-not-a-subcommand") == 1);
  CHECK(run_cli("fit --input no_such_file.csv --t 5 --out missing_out.json") ==
        2);
  {
    std::ofstream out("bad_data.csv");
    out << "a,b\n1,2\n3,oops\n";
  }
  cleanup.paths.push_back("bad_data.csv");
  CHECK(run_cli("fit --input bad_data.csv --t 2 --out missing_out.json") == 2);
}

TEST_CASE("rerun reproduces outputs bit-identically") {
  Cleanup cleanup;
  cleanup.paths = {"rerun_data.csv", "rerun_data.csv.manifest.json",
                   "rerun_truth.json", "rerun_copy.csv"};
  REQUIRE(run_cli("simulate --d 3 --T 50 --seed 21 --out rerun_data.csv "
                  "--truth rerun_truth.json") == 0);
  std::rename("rerun_data.csv", "rerun_copy.csv");
  REQUIRE(run_cli("rerun --manifest rerun_data.csv.manifest.json") == 0);
  std::ifstream a("rerun_data.csv"), b("rerun_copy.csv");
  const std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  CHECK(!sa.empty());
}

TEST_CASE("ingest builds a 90-minute series from event data") {
  Cleanup cleanup;
  cleanup.paths = {"ingest_events.csv", "ingest_series.csv",
                   "ingest_series.csv.manifest.json"};
  {
    std::ofstream out("ingest_events.csv");
    out << "team_id,match_id,minute,is_home,shots\n";
    out << "t1,m1,5,1,3\n";
    out << "t1,m2,5,0,1\n";
    out << "t1,m1,91,1,7\n";
  }
  REQUIRE(run_cli("ingest --events ingest_events.csv --team t1 "
                  "--out ingest_series.csv") == 0);
  const dynamo::TimeSeriesMatrix series =
      dynamo::load_csv("ingest_series.csv", true);
  CHECK(series.rows() == 90);
  CHECK(series.values(4, 0) == 2.0);
  CHECK(series.values(89, 0) == 0.0);  // minute 91 dropped
  CHECK(run_cli("ingest --events ingest_events.csv --team nobody "
                "--out ingest_series.csv") == 2);
}

TEST_CASE("nonlinear fit and predict round through JSON") {
  Cleanup cleanup;
  cleanup.paths = {"nl_data.csv", "nl_data.csv.manifest.json",
                   "nl_fits.json", "nl_fits.json.manifest.json",
                   "nl_mse.json", "nl_mse.json.manifest.json"};
  REQUIRE(run_cli("simulate --d 3 --T 80 --mode nonlinear --seed 5 "
                  "--out nl_data.csv") == 0);
  REQUIRE(run_cli("fit --input nl_data.csv --t 40 --model nonlinear "
                  "--hidden-units 3 --seed 2 --bandwidth 0.5 "
                  "--eta-tol 1e-6 --out nl_fits.json") == 0);
  const dynamo::LoadedFits fits = dynamo::load_fits("nl_fits.json");
  REQUIRE(fits.fits.size() == 1);
  CHECK(fits.model == "nonlinear");
  CHECK(fits.fits[0].networks.size() == 3);
  CHECK((fits.fits[0].W.array() >= 0.0).all());
  REQUIRE(run_cli("predict --fits nl_fits.json --input nl_data.csv "
                  "--target v1 --out nl_mse.json") == 0);
  const dynamo::Json mse = dynamo::read_json_file("nl_mse.json");
  CHECK(mse.at("model") == "nonlinear");
  CHECK(mse.at("mse").get<double>() >= 0.0);
}

TEST_CASE("time ranges expand like comma lists") {
  Cleanup cleanup;
  cleanup.paths = {"range_data.csv", "range_data.csv.manifest.json",
                   "range_fits.json", "range_fits.json.manifest.json"};
  REQUIRE(run_cli("simulate --d 3 --T 100 --seed 4 --out range_data.csv") == 0);
  REQUIRE(run_cli("fit --input range_data.csv --t 30:90:30 --bandwidth 0.4 "
                  "--eta-tol 1e-3 --out range_fits.json") == 0);
  const dynamo::LoadedFits fits = dynamo::load_fits("range_fits.json");
  REQUIRE(fits.fits.size() == 3);
  CHECK(fits.fits[0].t == 30);
  CHECK(fits.fits[1].t == 60);
  CHECK(fits.fits[2].t == 90);
}

TEST_CASE("benchmark emits one row per model and component, deterministically") {
  Cleanup cleanup;
  cleanup.paths = {"bench_a.csv", "bench_a.csv.manifest.json", "bench_b.csv",
                   "bench_b.csv.manifest.json"};
  const std::string flags =
      "benchmark --d 4 --T 80 --t 40 --seeds 1 --grid 0.3,0.6 --folds 5 "
      "--models linear,baseline --jobs 2 ";
  REQUIRE(run_cli(flags + "--out bench_a.csv") == 0);
  REQUIRE(run_cli(flags + "--out bench_b.csv") == 0);
  std::ifstream a("bench_a.csv"), b("bench_b.csv");
  std::string header, line;
  std::getline(a, header);
  CHECK(header.find("median_f1") != std::string::npos);
  int rows = 0;
  while (std::getline(a, line)) rows += !line.empty();
  CHECK(rows == 4);  // 2 models x {instantaneous, lagged}
  std::ifstream a2("bench_a.csv");
  const std::string sa((std::istreambuf_iterator<char>(a2)),
                       std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
  CHECK(sa == sb);
}

TEST_CASE("strict fit flags non-convergence with exit 3") {
  Cleanup cleanup;
  cleanup.paths = {"strict_data.csv", "strict_data.csv.manifest.json",
                   "strict_fits.json", "strict_fits.json.manifest.json"};
  REQUIRE(run_cli("simulate --d 4 --T 100 --seed 2 --out strict_data.csv") ==
          0);
  // One mild outer iteration cannot reach a 1e-12 acyclicity tolerance on
  // dense (lambda = 0) parameters.
  const int code = run_cli(
      "fit --input strict_data.csv --t 50 --bandwidth 0.5 --eta-tol 1e-12 "
      "--max-outer 1 --lambda1 0 --lambda2 0 --strict --out strict_fits.json");
  CHECK(code == 3);
}
