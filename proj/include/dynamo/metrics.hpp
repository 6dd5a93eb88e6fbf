// Graph comparison metrics, lag selection and the prediction harness.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "dynamo/errors.hpp"
#include "dynamo/linear.hpp"
#include "dynamo/nonlinear.hpp"
#include "dynamo/time_series.hpp"

namespace dynamo {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct BinaryGraph {
  BoolMatrix instantaneous;  // d x d, diagonal false
  BoolMatrix lagged;         // (L*d) x d
};

inline BoolMatrix binarize(const Eigen::MatrixXd& M, double tau) {
  BoolMatrix out(M.rows(), M.cols());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      out(i, j) = std::abs(M(i, j)) >= tau && M(i, j) != 0.0;
    }
  }
  return out;
}

// Instantaneous + lagged binarization; self-loops are dropped from the
// instantaneous component only (self-lags are legitimate edges).
inline BinaryGraph binarize(const LinearParams& params, double tau) {
  BinaryGraph graph{binarize(params.W, tau), binarize(params.A, tau)};
  for (Eigen::Index k = 0; k < graph.instantaneous.rows(); ++k) {
    graph.instantaneous(k, k) = false;
  }
  return graph;
}

enum class GraphComponent { Instantaneous, Lagged };

inline std::string to_string(GraphComponent c) {
  return c == GraphComponent::Instantaneous ? "instantaneous" : "lagged";
}

// Structural Hamming distance. For square (instantaneous) graphs a reversed
// edge counts as one change; rectangular lagged graphs have no reversal
// notion, so the count is extra + missing edges.
inline int shd(const BoolMatrix& est, const BoolMatrix& truth,
               GraphComponent component) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw DataError("shd: shape mismatch");
  }
  int changes = 0;
  if (component == GraphComponent::Instantaneous) {
    if (est.rows() != est.cols()) {
      throw DataError("instantaneous graphs must be square");
    }
    for (Eigen::Index i = 0; i < est.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < est.cols(); ++j) {
        const bool e_ij = est(i, j), e_ji = est(j, i);
        const bool t_ij = truth(i, j), t_ji = truth(j, i);
        if (e_ij == t_ij && e_ji == t_ji) continue;
        const bool pure_reversal =
            (e_ij != e_ji) && (t_ij != t_ji) && (e_ij == t_ji);
        changes += pure_reversal ? 1 : (e_ij != t_ij) + (e_ji != t_ji);
      }
    }
  } else {
    for (Eigen::Index i = 0; i < est.rows(); ++i) {
      for (Eigen::Index j = 0; j < est.cols(); ++j) {
        changes += est(i, j) != truth(i, j);
      }
    }
  }
  return changes;
}

struct MetricsReport {
  int shd = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  GraphComponent component = GraphComponent::Instantaneous;
};

// Directed-edge precision/recall/F1. Two empty graphs agree perfectly
// (P = R = F1 = 1); exactly one empty gives F1 = 0.
inline MetricsReport f1_score(const BoolMatrix& est, const BoolMatrix& truth,
                              GraphComponent component) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols()) {
    throw DataError("f1: shape mismatch");
  }
  int n_est = 0, n_truth = 0, n_both = 0;
  for (Eigen::Index i = 0; i < est.rows(); ++i) {
    for (Eigen::Index j = 0; j < est.cols(); ++j) {
      n_est += est(i, j);
      n_truth += truth(i, j);
      n_both += est(i, j) && truth(i, j);
    }
  }
  MetricsReport report;
  report.component = component;
  report.shd = shd(est, truth, component);
  if (n_est == 0 && n_truth == 0) {
    report.precision = report.recall = report.f1 = 1.0;
    return report;
  }
  report.precision = n_est > 0 ? static_cast<double>(n_both) / n_est : 0.0;
  report.recall = n_truth > 0 ? static_cast<double>(n_both) / n_truth : 0.0;
  const double pr = report.precision + report.recall;
  report.f1 = pr > 0 ? 2.0 * report.precision * report.recall / pr : 0.0;
  return report;
}

// Number of leading lag slices that still carry signal: scans lag 1 upward
// and stops at the first slice whose largest |entry| falls below the
// threshold.
inline int select_lag(const std::vector<Eigen::MatrixXd>& lag_slices,
                      double threshold) {
  int count = 0;
  for (const auto& slice : lag_slices) {
    if (slice.size() == 0 ||
        slice.cwiseAbs().maxCoeff() <= threshold) {
      break;
    }
    ++count;
  }
  return count;
}

// One-step prediction error of fitted structural equations, evaluated at
// the observed regressors of each fit's own time point.
inline double predict_mse(const std::vector<FitResult>& fits,
                          const LaggedView& lagged, Eigen::Index target) {
  if (fits.empty()) throw DataError("predict_mse: no fits");
  if (target < 0 || target >= lagged.d()) {
    throw DataError("predict_mse: target index out of range");
  }
  double sum = 0.0;
  for (const auto& fit : fits) {
    const Eigen::Index k = fit.t - lagged.L - 1;  // usable row of this t
    if (k < 0 || k >= lagged.n()) {
      throw DataError("no observed regressors for fit at t=" +
                      std::to_string(fit.t));
    }
    const Eigen::RowVectorXd x = lagged.aligned_targets.row(k);
    const Eigen::RowVectorXd y = lagged.rows.row(k);
    const double pred = (x * fit.params.W.col(target)).value() +
                        (y * fit.params.A.col(target)).value();
    const double err = x(target) - pred;
    sum += err * err;
  }
  return sum / static_cast<double>(fits.size());
}

inline double predict_mse(const std::vector<NonlinearFitResult>& fits,
                          const LaggedView& lagged, Eigen::Index target) {
  if (fits.empty()) throw DataError("predict_mse: no fits");
  if (target < 0 || target >= lagged.d()) {
    throw DataError("predict_mse: target index out of range");
  }
  double sum = 0.0;
  for (const auto& fit : fits) {
    const Eigen::Index k = fit.t - lagged.L - 1;
    if (k < 0 || k >= lagged.n()) {
      throw DataError("no observed regressors for fit at t=" +
                      std::to_string(fit.t));
    }
    const auto& net = fit.networks[static_cast<std::size_t>(target)];
    const double pred = forward(net, lagged.aligned_targets.row(k).transpose(),
                                lagged.rows.row(k).transpose());
    const double err = lagged.aligned_targets(k, target) - pred;
    sum += err * err;
  }
  return sum / static_cast<double>(fits.size());
}

}  // namespace dynamo
