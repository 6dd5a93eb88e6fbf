// Kernel-weighted linear structure estimation.
//
// At a time point t the estimator minimizes
//   sum_l w_l ||x_l - W^T x_l - A^T y_l||^2 + lambda1 ||W||_1 + lambda2 ||A||_1
//     + rho/2 H(W)^2 + alpha H(W)
// over the instantaneous graph W (d x d, zero diagonal) and lagged graph A
// (L*d x d), where w_l are the local kernel weights and H is the
// trace-exponential acyclicity measure. The l1 terms are handled exactly by
// splitting each matrix into nonnegative parts (W = W+ - W-) and running a
// bound-constrained quasi-Newton solve inside an augmented-Lagrangian loop
// that escalates rho until H(W) falls below eta_tol.
#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "dynamo/acyclicity.hpp"
#include "dynamo/errors.hpp"
#include "dynamo/kernel.hpp"
#include "dynamo/rng.hpp"
#include "dynamo/solver.hpp"
#include "dynamo/time_series.hpp"

namespace dynamo {

struct LinearParams {
  Eigen::MatrixXd W;  // d x d, zero diagonal
  Eigen::MatrixXd A;  // (L*d) x d
};

struct SolverConfig {
  double lambda1 = 0.05;
  double lambda2 = 0.05;
  double rho0 = 1.0;
  double alpha0 = 0.0;
  double rho_max = 1e16;
  double eta_tol = 1e-5;
  double c = 0.25;  // required progress ratio on H before rho escalates
  double q = 10.0;  // rho escalation factor
  int max_outer = 100;
  double inner_tol = 1e-6;
  int inner_max_iter = 500;
  int lbfgs_memory = 10;

  // Deterministic zero start by default; optionally a seeded uniform start.
  bool random_init = false;
  std::uint64_t init_seed = 0;
  double init_scale = 0.1;

  // eta_tol = 1e-3 is the profile used for synthetic benchmarks.
  static SolverConfig simulation_profile() {
    SolverConfig cfg;
    cfg.eta_tol = 1e-3;
    return cfg;
  }

  void validate() const {
    if (!(rho0 > 0) || !(rho0 < rho_max)) {
      throw DataError("solver config requires 0 < rho0 < rho_max");
    }
    if (!(eta_tol > 0)) throw DataError("eta_tol must be > 0");
    if (!(c > 0 && c < 1)) throw DataError("progress rate c must be in (0,1)");
    if (!(q > 1)) throw DataError("escalation factor q must be > 1");
    if (lambda1 < 0 || lambda2 < 0) throw DataError("lambdas must be >= 0");
    if (max_outer < 1) throw DataError("max_outer must be >= 1");
  }
};

struct FitResult {
  LinearParams params;
  Eigen::Index t = 0;
  double bandwidth = 0.0;
  double loss = 0.0;  // weighted residual + l1 penalties at the solution
  double eta = 0.0;   // final H(W)
  // Largest elementwise min(positive part, negative part) of the recast
  // variables at the solution; complementarity keeps it near zero.
  double recast_overlap = 0.0;
  int outer_iterations = 0;
  bool converged = false;
};

struct LinearObjective {
  double value = 0.0;           // full objective including l1 terms
  Eigen::MatrixXd grad_W;       // gradient of the smooth part only
  Eigen::MatrixXd grad_A;
  double h = 0.0;               // H(W) at the evaluation point
};

// Evaluates the objective above. `weights` must have one entry per usable
// row of `lagged` (times l = L+1..T). The returned gradients cover the
// smooth part (residual + acyclicity); the l1 subgradient is carried by the
// nonnegative recast inside fit_at.
inline LinearObjective objective_and_gradient(
    const LinearParams& params, const LaggedView& lagged,
    const Eigen::VectorXd& weights, const SolverConfig& cfg, double rho,
    double alpha) {
  const Eigen::Index n = lagged.n();
  const Eigen::Index d = lagged.d();
  if (params.W.rows() != d || params.W.cols() != d) {
    throw DataError("W must be " + std::to_string(d) + "x" + std::to_string(d));
  }
  if (params.A.rows() != lagged.rows.cols() || params.A.cols() != d) {
    throw DataError("A shape does not match the lagged view");
  }
  if (weights.size() != n) {
    throw DataError("weight vector length " + std::to_string(weights.size()) +
                    " does not match usable rows " + std::to_string(n));
  }

  const Eigen::MatrixXd& X = lagged.aligned_targets;
  const Eigen::MatrixXd& Y = lagged.rows;
  const Eigen::MatrixXd R = X - X * params.W - Y * params.A;
  const Eigen::MatrixXd WR = R.array().colwise() * weights.array();

  LinearObjective out;
  const double quad = (R.array() * WR.array()).sum();
  out.grad_W = -2.0 * X.transpose() * WR;
  out.grad_A = -2.0 * Y.transpose() * WR;

  const Eigen::MatrixXd E = matrix_exp(params.W.cwiseProduct(params.W));
  out.h = E.trace() - static_cast<double>(d);
  out.grad_W +=
      (rho * out.h + alpha) * E.transpose().cwiseProduct(2.0 * params.W);

  out.value = quad + cfg.lambda1 * params.W.cwiseAbs().sum() +
              cfg.lambda2 * params.A.cwiseAbs().sum() +
              0.5 * rho * out.h * out.h + alpha * out.h;
  return out;
}

// Sets entries with |value| < tau to zero.
inline LinearParams threshold(const LinearParams& params, double tau) {
  if (tau < 0) throw DataError("threshold must be >= 0");
  LinearParams out = params;
  out.W = (out.W.cwiseAbs().array() < tau).select(0.0, out.W);
  out.A = (out.A.cwiseAbs().array() < tau).select(0.0, out.A);
  return out;
}

namespace detail {

// Variable layout for the recast problem: [W+ W- A+ A-], each column-major.
struct RecastLayout {
  Eigen::Index d;
  Eigen::Index ld;
  Eigen::Index size() const { return 2 * d * d + 2 * ld * d; }

  Eigen::MatrixXd unpack_W(const Eigen::VectorXd& z) const {
    using CM = Eigen::Map<const Eigen::MatrixXd>;
    return CM(z.data(), d, d) - CM(z.data() + d * d, d, d);
  }
  Eigen::MatrixXd unpack_A(const Eigen::VectorXd& z) const {
    using CM = Eigen::Map<const Eigen::MatrixXd>;
    const Eigen::Index off = 2 * d * d;
    return CM(z.data() + off, ld, d) - CM(z.data() + off + ld * d, ld, d);
  }
};

}  // namespace detail

// Weights for the usable rows of `lagged` (times l = L+1..T) for a fit
// centered at t, i.e. the tail of local_weights past the first L entries.
inline Eigen::VectorXd usable_weights(const KernelSpec& kernel, Eigen::Index t,
                                      const LaggedView& lagged) {
  const Eigen::VectorXd full = local_weights(kernel, t, lagged.source_length());
  return full.tail(lagged.n());
}

// Core fit with an explicit per-usable-row weight vector. fit_at supplies
// the kernel weights; cross-validation zeroes held-out rows here, which
// removes them from the training objective and its gradient entirely.
inline FitResult fit_with_weights(Eigen::Index t, const LaggedView& lagged,
                                  const KernelSpec& kernel,
                                  const SolverConfig& cfg,
                                  const Eigen::VectorXd& w) {
  cfg.validate();
  kernel.validate();
  const Eigen::Index T = lagged.source_length();
  if (t < 1 || t > T) {
    throw DataError("fit time t=" + std::to_string(t) +
                    " outside [1, T=" + std::to_string(T) + "]");
  }
  const Eigen::Index d = lagged.d();
  if (w.size() != lagged.n()) {
    throw DataError("weight vector length does not match usable rows");
  }
  if ((w.array() > 0.0).count() < d) {
    throw DataError("degenerate kernel weights at t=" + std::to_string(t) +
                    ": fewer than d=" + std::to_string(d) +
                    " points carry weight; increase the bandwidth");
  }

  const Eigen::MatrixXd& X = lagged.aligned_targets;
  const Eigen::MatrixXd& Y = lagged.rows;
  const Eigen::Index ld = Y.cols();
  const detail::RecastLayout layout{d, ld};

  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(layout.size());
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(layout.size(), inf);
  for (Eigen::Index j = 0; j < d; ++j) {  // no self-loops: pin diag(W+-) at 0
    upper(j * d + j) = 0.0;
    upper(d * d + j * d + j) = 0.0;
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(layout.size());
  if (cfg.random_init) {
    Rng rng(cfg.init_seed);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      z(i) = rng.uniform(0.0, cfg.init_scale);
    }
  }

  double rho = cfg.rho0;
  double alpha = cfg.alpha0;

  auto closure = [&](const Eigen::VectorXd& zv, Eigen::VectorXd& grad) {
    const Eigen::MatrixXd W = layout.unpack_W(zv);
    const Eigen::MatrixXd B = W.cwiseProduct(W);
    if (B.cwiseAbs().colwise().sum().maxCoeff() > 600.0) {
      // exp would overflow; report an infinite objective so the line
      // search backs off
      grad = Eigen::VectorXd::Zero(zv.size());
      return std::numeric_limits<double>::infinity();
    }
    const Eigen::MatrixXd A = layout.unpack_A(zv);
    const Eigen::MatrixXd R = X - X * W - Y * A;
    const Eigen::MatrixXd WR = R.array().colwise() * w.array();
    const double quad = (R.array() * WR.array()).sum();

    Eigen::MatrixXd gW = -2.0 * X.transpose() * WR;
    const Eigen::MatrixXd gA = -2.0 * Y.transpose() * WR;
    const Eigen::MatrixXd E = matrix_exp(B);
    const double h = E.trace() - static_cast<double>(d);
    gW += (rho * h + alpha) * E.transpose().cwiseProduct(2.0 * W);

    grad.resize(zv.size());
    using MM = Eigen::Map<Eigen::MatrixXd>;
    MM(grad.data(), d, d) = gW.array() + cfg.lambda1;
    MM(grad.data() + d * d, d, d) = -gW.array() + cfg.lambda1;
    MM(grad.data() + 2 * d * d, ld, d) = gA.array() + cfg.lambda2;
    MM(grad.data() + 2 * d * d + ld * d, ld, d) = -gA.array() + cfg.lambda2;

    return quad + cfg.lambda1 * zv.head(2 * d * d).sum() +
           cfg.lambda2 * zv.tail(2 * ld * d).sum() + 0.5 * rho * h * h +
           alpha * h;
  };

  SolveOptions inner;
  inner.memory = cfg.lbfgs_memory;
  inner.max_iterations = cfg.inner_max_iter;
  inner.gradient_tol = cfg.inner_tol;

  double eta_prev = inf;
  double eta_star = inf;
  int outer = 0;
  for (outer = 1; outer <= cfg.max_outer; ++outer) {
    Eigen::VectorXd z_candidate;
    for (;;) {
      z_candidate = z;
      minimize_box(closure, z_candidate, lower, upper, inner);
      eta_star = h_value(layout.unpack_W(z_candidate));
      if (eta_star > cfg.c * eta_prev && rho < cfg.rho_max) {
        rho *= cfg.q;
        continue;
      }
      break;
    }
    z = z_candidate;
    eta_prev = eta_star;
    alpha += rho * eta_star;
    if (eta_star < cfg.eta_tol || rho >= cfg.rho_max) break;
  }

  FitResult result;
  result.params.W = layout.unpack_W(z);
  result.params.A = layout.unpack_A(z);
  {
    const Eigen::Index dd = d * d;
    const Eigen::Index la = ld * d;
    result.recast_overlap = std::max(
        z.head(dd).cwiseMin(z.segment(dd, dd)).maxCoeff(),
        z.segment(2 * dd, la).cwiseMin(z.tail(la)).maxCoeff());
  }
  result.t = t;
  result.bandwidth = kernel.bandwidth;
  result.eta = eta_star;
  result.outer_iterations = std::min(outer, cfg.max_outer);
  result.converged = eta_star < cfg.eta_tol;
  {
    const Eigen::MatrixXd R = X - X * result.params.W - Y * result.params.A;
    result.loss = (R.array().square().colwise() * w.array()).sum() +
                  cfg.lambda1 * result.params.W.cwiseAbs().sum() +
                  cfg.lambda2 * result.params.A.cwiseAbs().sum();
  }
  return result;
}

inline FitResult fit_at(Eigen::Index t, const LaggedView& lagged,
                        const KernelSpec& kernel, const SolverConfig& cfg) {
  kernel.validate();
  return fit_with_weights(t, lagged, kernel, cfg,
                          usable_weights(kernel, t, lagged));
}

// Runs a distinct worker pool over independent per-index tasks and rethrows
// the first failure with its index attached.
namespace detail {

template <class Fn>
void parallel_for(Eigen::Index count, int jobs, Fn&& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (Eigen::Index i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::vector<std::string> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  const int workers = static_cast<int>(
      std::min<Eigen::Index>(jobs, count));
  for (int wkr = 0; wkr < workers; ++wkr) {
    pool.emplace_back([&]() {
      for (;;) {
        const Eigen::Index i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (const std::exception& e) {
          errors[static_cast<std::size_t>(i)] = e.what();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!errors[static_cast<std::size_t>(i)].empty()) {
      throw DataError(errors[static_cast<std::size_t>(i)]);
    }
  }
}

}  // namespace detail

// Independent per-t fits; order of `times` is preserved in the result and
// per-t failures carry the offending t in the message.
inline std::vector<FitResult> fit_path(const std::vector<Eigen::Index>& times,
                                       const LaggedView& lagged,
                                       const KernelSpec& kernel,
                                       const SolverConfig& cfg, int jobs = 1) {
  std::vector<FitResult> results(times.size());
  detail::parallel_for(
      static_cast<Eigen::Index>(times.size()), jobs, [&](Eigen::Index i) {
        try {
          results[static_cast<std::size_t>(i)] =
              fit_at(times[static_cast<std::size_t>(i)], lagged, kernel, cfg);
        } catch (const std::exception& e) {
          throw DataError("fit at t=" +
                          std::to_string(times[static_cast<std::size_t>(i)]) +
                          " failed: " + e.what());
        }
      });
  return results;
}

}  // namespace dynamo
