// Projected L-BFGS for box-constrained smooth minimization.
//
// Limited-memory BFGS directions restricted to the free variables, a
// projected Armijo backtracking line search, and convergence measured on
// the projected gradient. Bounds may be infinite; lower == upper pins a
// variable.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <limits>

#include "dynamo/errors.hpp"

namespace dynamo {

struct SolveOptions {
  int memory = 10;
  int max_iterations = 500;
  double gradient_tol = 1e-6;  // inf-norm of the projected gradient
  double armijo_c = 1e-4;
  double min_step = 1e-20;
};

struct SolveReport {
  double objective = std::numeric_limits<double>::quiet_NaN();
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;  // projected gradient fell below tolerance
};

namespace detail {

inline Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace detail

// fn(x, grad) must fill grad and return the objective value.
template <class Objective>
SolveReport minimize_box(Objective&& fn, Eigen::VectorXd& x,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         const SolveOptions& opts = {}) {
  const Eigen::Index n = x.size();
  if (lower.size() != n || upper.size() != n) {
    throw DataError("bound vectors must match the variable count");
  }
  x = detail::clamp_to_box(x, lower, upper);

  Eigen::VectorXd grad(n);
  double f = fn(x, grad);
  if (!std::isfinite(f)) throw DataError("objective is not finite at the start");

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  SolveReport report;
  report.objective = f;

  Eigen::VectorXd new_grad(n);
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Eigen::VectorXd pg = x - detail::clamp_to_box(x - grad, lower, upper);
    report.projected_gradient_norm = pg.lpNorm<Eigen::Infinity>();
    report.iterations = iter;
    if (report.projected_gradient_norm <= opts.gradient_tol) {
      report.converged = true;
      return report;
    }

    // Variables pinned at a bound with the gradient pushing outward stay put.
    Eigen::Array<bool, Eigen::Dynamic, 1> active(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      active(i) = (x(i) <= lower(i) && grad(i) > 0.0) ||
                  (x(i) >= upper(i) && grad(i) < 0.0);
    }

    auto masked = [&](Eigen::VectorXd v) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (active(i)) v(i) = 0.0;
      }
      return v;
    };

    // Two-loop recursion on the full space, then restrict to free variables.
    auto lbfgs_direction = [&]() {
      Eigen::VectorXd q = masked(grad);
      const int m = static_cast<int>(s_hist.size());
      Eigen::VectorXd alpha(m);
      for (int i = m - 1; i >= 0; --i) {
        alpha(i) = rho_hist[i] * s_hist[i].dot(q);
        q -= alpha(i) * y_hist[i];
      }
      if (m > 0) {
        const double gamma =
            s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        q *= gamma;
      }
      for (int i = 0; i < m; ++i) {
        const double beta = rho_hist[i] * y_hist[i].dot(q);
        q += (alpha(i) - beta) * s_hist[i];
      }
      return Eigen::VectorXd(-masked(q));
    };

    bool accepted = false;
    Eigen::VectorXd x_next;
    double f_next = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const Eigen::VectorXd dir =
          attempt == 0 ? lbfgs_direction() : Eigen::VectorXd(-masked(grad));
      if (dir.dot(grad) >= 0.0) continue;  // not a descent direction

      double step = 1.0;
      while (step >= opts.min_step) {
        x_next = detail::clamp_to_box(x + step * dir, lower, upper);
        const Eigen::VectorXd dx = x_next - x;
        if (dx.lpNorm<Eigen::Infinity>() == 0.0) break;
        const double slope = grad.dot(dx);  // projected step must descend
        if (slope < 0.0) {
          f_next = fn(x_next, new_grad);
          if (std::isfinite(f_next) && f_next <= f + opts.armijo_c * slope) {
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!accepted && attempt == 0) {
        // Stale curvature can poison the direction; drop it and retry with
        // projected steepest descent.
        s_hist.clear();
        y_hist.clear();
        rho_hist.clear();
      }
    }
    if (!accepted) {
      report.iterations = iter + 1;
      return report;  // line search stalled; best point so far is in x
    }

    const Eigen::VectorXd s = x_next - x;
    const Eigen::VectorXd y = new_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = x_next;
    grad = new_grad;
    f = f_next;
    report.objective = f;
  }
  report.iterations = opts.max_iterations;
  return report;
}

// Unconstrained convenience overload.
template <class Objective>
SolveReport minimize(Objective&& fn, Eigen::VectorXd& x,
                     const SolveOptions& opts = {}) {
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd lower = Eigen::VectorXd::Constant(x.size(), -inf);
  const Eigen::VectorXd upper = Eigen::VectorXd::Constant(x.size(), inf);
  return minimize_box(fn, x, lower, upper, opts);
}

}  // namespace dynamo
