#include <catch2/catch_amalgamated.hpp>

#include "dynamo/metrics.hpp"
#include "dynamo/rng.hpp"
#include "dynamo/simulate.hpp"

using namespace dynamo;

namespace {

BoolMatrix graph3(std::initializer_list<std::pair<int, int>> edges) {
  BoolMatrix g = BoolMatrix::Constant(3, 3, false);
  for (const auto& [i, j] : edges) g(i, j) = true;
  return g;
}

}  // namespace

TEST_CASE("shd counts extra, missing and reversed edges") {
  CHECK(shd(graph3({{0, 1}}), graph3({{0, 1}}),
            GraphComponent::Instantaneous) == 0);
  // 1->2 estimated as 2->1: a single reversal
  CHECK(shd(graph3({{1, 0}}), graph3({{0, 1}}),
            GraphComponent::Instantaneous) == 1);
  // truth {0->1, 0->2}, est {0->1, 1->2}: one missing + one extra
  CHECK(shd(graph3({{0, 1}, {1, 2}}), graph3({{0, 1}, {0, 2}}),
            GraphComponent::Instantaneous) == 2);
  CHECK_THROWS_AS(shd(graph3({}), BoolMatrix::Constant(2, 2, false),
                      GraphComponent::Instantaneous),
                  DataError);
}

TEST_CASE("shd is symmetric in its arguments") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    BoolMatrix a = BoolMatrix::Constant(4, 4, false);
    BoolMatrix b = BoolMatrix::Constant(4, 4, false);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i == j) continue;
        a(i, j) = rng.uniform01() < 0.4;
        b(i, j) = rng.uniform01() < 0.4;
      }
    }
    CHECK(shd(a, b, GraphComponent::Instantaneous) ==
          shd(b, a, GraphComponent::Instantaneous));
    CHECK(shd(a, a, GraphComponent::Instantaneous) == 0);
  }
}

TEST_CASE("lagged shd has no reversal notion") {
  BoolMatrix est = BoolMatrix::Constant(2, 2, false);
  BoolMatrix truth = BoolMatrix::Constant(2, 2, false);
  est(0, 1) = true;
  truth(1, 0) = true;
  CHECK(shd(est, truth, GraphComponent::Lagged) == 2);  // extra + missing
}

TEST_CASE("f1 formula and edge-case conventions") {
  // est 4 edges, 2 correct; truth 2 edges
  BoolMatrix est = BoolMatrix::Constant(4, 4, false);
  est(0, 1) = est(0, 2) = est(1, 3) = est(2, 3) = true;
  BoolMatrix truth = BoolMatrix::Constant(4, 4, false);
  truth(0, 1) = truth(0, 2) = true;
  const MetricsReport r = f1_score(est, truth, GraphComponent::Instantaneous);
  CHECK(r.precision == Catch::Approx(0.5));
  CHECK(r.recall == Catch::Approx(1.0));
  CHECK(r.f1 == Catch::Approx(2.0 / 3.0));

  const BoolMatrix empty = BoolMatrix::Constant(4, 4, false);
  const MetricsReport both = f1_score(empty, empty,
                                      GraphComponent::Instantaneous);
  CHECK(both.precision == 1.0);
  CHECK(both.recall == 1.0);
  CHECK(both.f1 == 1.0);

  const MetricsReport one = f1_score(est, empty,
                                     GraphComponent::Instantaneous);
  CHECK(one.f1 == 0.0);
  const MetricsReport other = f1_score(empty, truth,
                                       GraphComponent::Instantaneous);
  CHECK(other.f1 == 0.0);
}

TEST_CASE("perfect match gives f1 = 1, and only then") {
  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    BoolMatrix g = BoolMatrix::Constant(4, 4, false);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        if (i != j) g(i, j) = rng.uniform01() < 0.3;
      }
    }
    CHECK(f1_score(g, g, GraphComponent::Instantaneous).f1 == 1.0);
    BoolMatrix other = g;
    other(0, 1) = !other(0, 1);
    CHECK(f1_score(other, g, GraphComponent::Instantaneous).f1 < 1.0);
  }
}

TEST_CASE("lag selection scans slices in order") {
  Eigen::MatrixXd strong(2, 2), weak(2, 2);
  strong << 0.5, 0.0, 0.0, 0.1;
  weak << 0.01, 0.0, 0.0, 0.02;
  CHECK(select_lag({strong, weak}, 0.05) == 1);
  CHECK(select_lag({weak, weak}, 0.05) == 0);
  CHECK(select_lag({strong, strong}, 0.05) == 2);
  Eigen::MatrixXd mid(2, 2);
  mid << 0.2, 0.0, 0.0, 0.0;
  CHECK(select_lag({weak, mid}, 0.05) == 0);  // stops at the first weak slice
}

TEST_CASE("predict_mse is zero with the exact generating parameters") {
  // Noiseless linear data from fixed (W, A)
  const int d = 3, T = 40;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, d);
  W(0, 1) = 0.9;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
  A(2, 2) = 0.5;
  TimeSeriesMatrix ts;
  ts.values.resize(T, d);
  ts.variable_names = {"a", "b", "c"};
  Rng rng(4);
  Eigen::RowVectorXd prev(d);
  for (int j = 0; j < d; ++j) prev(j) = rng.normal();
  ts.values.row(0) = prev;
  const Eigen::MatrixXd Minv =
      (Eigen::MatrixXd::Identity(d, d) - W).inverse();
  for (int t = 1; t < T; ++t) {
    Eigen::RowVectorXd drive(d);
    for (int j = 0; j < d; ++j) drive(j) = rng.normal();
    drive(1) = 0.0;  // keep the b equation noiseless
    const Eigen::RowVectorXd x = (prev * A + drive) * Minv;
    ts.values.row(t) = x;
    prev = x;
  }
  const LaggedView lagged = build_lagged(ts, 1);
  std::vector<FitResult> fits;
  for (Eigen::Index t : {10, 20, 30}) {
    FitResult fit;
    fit.t = t;
    fit.params = {W, A};
    fits.push_back(fit);
  }
  CHECK(predict_mse(fits, lagged, 1) == Catch::Approx(0.0).margin(1e-20));
}

TEST_CASE("zero-parameter fits predict zero, so mse is the second moment") {
  SimulationSpec spec;
  spec.d = 3;
  spec.T = 30;
  spec.seed = 6;
  const SimulatedData data = simulate(spec);
  const LaggedView lagged = build_lagged(data.series, 1);
  std::vector<FitResult> fits;
  double second_moment = 0.0;
  for (Eigen::Index t = 2; t <= spec.T; ++t) {
    FitResult fit;
    fit.t = t;
    fit.params = {Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)};
    fits.push_back(fit);
    const double v = data.series.values(t - 1, 0);
    second_moment += v * v;
  }
  second_moment /= static_cast<double>(fits.size());
  CHECK(predict_mse(fits, lagged, 0) == Catch::Approx(second_moment));
}

TEST_CASE("nonlinear predict_mse runs the stored networks") {
  SimulationSpec spec;
  spec.d = 3;
  spec.T = 40;
  spec.mode = SemMode::Nonlinear;
  spec.seed = 15;
  const SimulatedData data = simulate(spec);
  const LaggedView lagged = build_lagged(data.series, 1);
  NonlinearConfig cfg;
  cfg.hidden_units = 2;
  cfg.seed = 9;
  std::vector<NonlinearFitResult> fits;
  NonlinearFitResult fit;
  fit.t = 20;
  fit.networks = make_networks(3, 3, cfg);
  fits.push_back(fit);
  const double mse = predict_mse(fits, lagged, 1);
  // the same prediction by hand through forward()
  const Eigen::Index k = 20 - 1 - 1;
  const double pred = forward(fits[0].networks[1],
                              lagged.aligned_targets.row(k).transpose(),
                              lagged.rows.row(k).transpose());
  const double err = lagged.aligned_targets(k, 1) - pred;
  CHECK(mse == Catch::Approx(err * err));
}

TEST_CASE("predict_mse rejects times without regressors") {
  SimulationSpec spec;
  spec.d = 3;
  spec.T = 20;
  spec.seed = 1;
  const SimulatedData data = simulate(spec);
  const LaggedView lagged = build_lagged(data.series, 1);
  FitResult fit;
  fit.t = 1;  // no lagged row exists for t = 1
  fit.params = {Eigen::MatrixXd::Zero(3, 3), Eigen::MatrixXd::Zero(3, 3)};
  CHECK_THROWS_AS(predict_mse(std::vector<FitResult>{fit}, lagged, 0),
                  DataError);
  CHECK_THROWS_AS(predict_mse(std::vector<FitResult>{}, lagged, 0), DataError);
}

TEST_CASE("binarize respects the threshold boundary") {
  Eigen::MatrixXd M(2, 2);
  M << 0.05, 0.049, -0.05, 0.0;
  const BoolMatrix b = binarize(M, 0.05);
  CHECK(b(0, 0));
  CHECK_FALSE(b(0, 1));
  CHECK(b(1, 0));
  CHECK_FALSE(b(1, 1));
}
