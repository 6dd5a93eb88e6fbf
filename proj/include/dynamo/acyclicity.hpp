// Trace-exponential acyclicity measure H(W) = tr(exp(W o W)) - d.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "dynamo/errors.hpp"

namespace dynamo {

// Matrix exponential by scaling-and-squaring with a truncated Taylor series
// (order 12, scaled so ||M/2^s||_1 <= 0.5). Exact for nilpotent inputs up to
// the nilpotency index, which is what the acyclicity check relies on.
inline Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw DataError("matrix_exp needs a square matrix");
  if (!M.allFinite()) throw DataError("matrix_exp needs finite entries");
  const Eigen::Index d = M.rows();

  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  }
  const Eigen::MatrixXd S = M / std::ldexp(1.0, squarings);

  constexpr int kOrder = 12;
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(d, d);
  for (int k = 1; k <= kOrder; ++k) {
    term = (term * S) / static_cast<double>(k);
    result += term;
  }
  for (int k = 0; k < squarings; ++k) {
    result = result * result;
  }
  if (!result.allFinite()) {
    throw DataError("matrix_exp overflowed (||M||_1 = " + std::to_string(norm1) +
                    ")");
  }
  return result;
}

// H(W) >= 0, and H(W) = 0 exactly when the support of W is acyclic.
inline double h_value(const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols()) throw DataError("h_value needs a square matrix");
  const Eigen::MatrixXd E = matrix_exp(W.cwiseProduct(W));
  return E.trace() - static_cast<double>(W.rows());
}

// dH/dW = exp(W o W)^T o 2W.
inline Eigen::MatrixXd h_gradient(const Eigen::MatrixXd& W) {
  if (W.rows() != W.cols()) throw DataError("h_gradient needs a square matrix");
  const Eigen::MatrixXd E = matrix_exp(W.cwiseProduct(W));
  return E.transpose().cwiseProduct(2.0 * W);
}

}  // namespace dynamo
