// Quasi-k-fold cross-validated bandwidth selection.
//
// The usable time points are split once into K seeded random folds. For
// each candidate bandwidth and fold, the estimator is refit with the fold's
// kernel weights zeroed out (so held-out points contribute nothing to the
// training objective). Held-out squared residuals are scored under one
// shared reference weighting - the kernel at the smallest grid bandwidth,
// centered on the target time point - so every candidate is judged on the
// same local test mass and score differences reflect only estimator
// quality near t. Penalties and acyclicity terms do not enter the test
// side. The bandwidth with the smallest score wins; ties go to the larger
// bandwidth.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dynamo/errors.hpp"
#include "dynamo/kernel.hpp"
#include "dynamo/linear.hpp"
#include "dynamo/nonlinear.hpp"
#include "dynamo/rng.hpp"
#include "dynamo/time_series.hpp"

namespace dynamo {

enum class ModelKind { Linear, Nonlinear };

struct CVConfig {
  std::vector<double> grid;
  int folds = 5;
  std::uint64_t seed = 0;
  ModelKind model = ModelKind::Linear;
  KernelFamily family = KernelFamily::Epanechnikov;

  void validate() const {
    if (grid.empty()) throw DataError("bandwidth grid is empty");
    if (folds < 2) throw DataError("need at least 2 folds");
    for (double h : grid) KernelSpec{family, h}.validate();
  }
};

struct BandwidthSelection {
  double chosen = 0.0;
  // One entry per grid point; NaN marks a bandwidth excluded because every
  // fold fit diverged.
  std::vector<double> cv_losses;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<std::vector<Eigen::Index>> make_folds(Eigen::Index n,
                                                         int K,
                                                         std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < order.size(); ++i) {
    folds[i % static_cast<std::size_t>(K)].push_back(order[i]);
  }
  return folds;
}

}  // namespace detail

inline BandwidthSelection select_bandwidth(
    Eigen::Index t, const LaggedView& lagged, const CVConfig& cv,
    const SolverConfig& solver, const NonlinearConfig& nonlinear = {}) {
  cv.validate();
  const Eigen::Index n = lagged.n();
  if (n < 2 * cv.folds) {
    throw DataError("need T - L >= 2K usable points for " +
                    std::to_string(cv.folds) + "-fold CV, have " +
                    std::to_string(n));
  }
  const auto folds = detail::make_folds(n, cv.folds, cv.seed);
  for (const auto& fold : folds) {
    if (fold.empty()) throw DataError("empty CV fold");
  }

  BandwidthSelection selection;
  selection.cv_losses.assign(cv.grid.size(),
                             std::numeric_limits<double>::quiet_NaN());

  const double reference_h = *std::min_element(cv.grid.begin(), cv.grid.end());
  const Eigen::VectorXd test_weights =
      usable_weights({cv.family, reference_h}, t, lagged);
  const double weight_mass = test_weights.sum();  // folds partition all rows
  if (weight_mass <= 0.0) {
    throw DataError("held-out points carry no weight at t=" +
                    std::to_string(t) + "; enlarge the smallest bandwidth");
  }

  for (std::size_t gi = 0; gi < cv.grid.size(); ++gi) {
    const KernelSpec spec{cv.family, cv.grid[gi]};
    const Eigen::VectorXd train_weights = usable_weights(spec, t, lagged);
    double weighted_loss = 0.0;
    int diverged = 0;
    bool usable = true;
    for (const auto& fold : folds) {
      Eigen::VectorXd w = train_weights;
      for (const Eigen::Index k : fold) w(k) = 0.0;
      if ((w.array() > 0.0).count() < lagged.d()) {
        usable = false;
        selection.warnings.push_back(
            "h=" + std::to_string(spec.bandwidth) +
            " leaves fewer than d weighted points after fold removal");
        break;
      }

      if (cv.model == ModelKind::Linear) {
        const FitResult fit = fit_with_weights(t, lagged, spec, solver, w);
        if (!fit.converged) ++diverged;
        for (const Eigen::Index k : fold) {
          const Eigen::RowVectorXd r = lagged.aligned_targets.row(k) -
                                       lagged.aligned_targets.row(k) * fit.params.W -
                                       lagged.rows.row(k) * fit.params.A;
          weighted_loss += test_weights(k) * r.squaredNorm();
        }
      } else {
        const NonlinearFitResult fit =
            fit_nonlinear_with_weights(t, lagged, spec, nonlinear, w);
        if (!fit.converged) ++diverged;
        for (const Eigen::Index k : fold) {
          double point_loss = 0.0;
          for (Eigen::Index j = 0; j < lagged.d(); ++j) {
            const double pred = forward(
                fit.networks[static_cast<std::size_t>(j)],
                lagged.aligned_targets.row(k).transpose(),
                lagged.rows.row(k).transpose());
            const double err = lagged.aligned_targets(k, j) - pred;
            point_loss += err * err;
          }
          weighted_loss += test_weights(k) * point_loss;
        }
      }
    }
    if (!usable) continue;
    if (diverged == cv.folds) {
      selection.warnings.push_back("h=" + std::to_string(spec.bandwidth) +
                                   " excluded: all fold fits diverged");
      continue;
    }
    selection.cv_losses[gi] = weighted_loss / weight_mass;
  }

  double best = std::numeric_limits<double>::infinity();
  double chosen = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t gi = 0; gi < cv.grid.size(); ++gi) {
    const double loss = selection.cv_losses[gi];
    if (std::isnan(loss)) continue;
    if (loss < best || (loss == best && cv.grid[gi] > chosen)) {
      best = loss;
      chosen = cv.grid[gi];
    }
  }
  if (std::isnan(chosen)) {
    throw DataError("every bandwidth in the grid was excluded");
  }
  selection.chosen = chosen;
  return selection;
}

}  // namespace dynamo
