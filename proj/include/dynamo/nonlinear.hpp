// Kernel-weighted nonlinear structure estimation.
//
// One feedforward network per target variable j predicts x^[j] from the
// other contemporaneous variables and all lagged variables; the input x^[j]
// itself is excluded by construction. Each input variable owns one column
// of the first layer, and the derived adjacency entries are the Euclidean
// norms of those columns:
//   W(i,j) = ||phi^{i,j}||_2   (contemporaneous input i != j)
//   A(r,j) = ||phi^{r,j}||_2   (lagged input r)
// so an input is disconnected exactly when its whole first-layer group is
// zero. Group-lasso penalties on the first layer make that happen; the
// acyclicity term H(W) applies to the derived instantaneous graph, and the
// same augmented-Lagrangian loop as the linear estimator drives it to zero.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dynamo/acyclicity.hpp"
#include "dynamo/errors.hpp"
#include "dynamo/kernel.hpp"
#include "dynamo/linear.hpp"
#include "dynamo/rng.hpp"
#include "dynamo/solver.hpp"
#include "dynamo/time_series.hpp"

namespace dynamo {

enum class Activation { Sigmoid, Identity };

inline double activate(Activation act, double u) {
  if (act == Activation::Identity) return u;
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u))
                  : std::exp(u) / (1.0 + std::exp(u));
}

struct TargetNetwork {
  int target = 0;           // index j of the predicted variable
  int d = 0;                // contemporaneous variable count
  int lagged_inputs = 0;    // L*d
  Activation activation = Activation::Sigmoid;
  // Columns 0..d-2 are the contemporaneous groups (input i, skipping j, in
  // ascending order); columns d-1 .. d-2+L*d are the lagged groups.
  Eigen::MatrixXd first_layer;   // m x (d-1 + L*d)
  Eigen::VectorXd hidden_bias;   // m
  Eigen::VectorXd output_weights;  // m
  double output_bias = 0.0;

  int hidden_units() const { return static_cast<int>(hidden_bias.size()); }
  int inputs() const { return d - 1 + lagged_inputs; }

  // First-layer column owning contemporaneous input i (i != target).
  Eigen::Index contemporaneous_column(int i) const {
    return i < target ? i : i - 1;
  }
  Eigen::Index lagged_column(int r) const { return d - 1 + r; }
};

// Prediction of x^[j] from the contemporaneous vector (the entry at the
// target index is never read) and the lagged vector.
inline double forward(const TargetNetwork& net,
                      const Eigen::VectorXd& x_contemporaneous,
                      const Eigen::VectorXd& y_lagged) {
  if (x_contemporaneous.size() != net.d || y_lagged.size() != net.lagged_inputs) {
    throw DataError("forward: input sizes do not match the network");
  }
  Eigen::VectorXd in(net.inputs());
  Eigen::Index pos = 0;
  for (int i = 0; i < net.d; ++i) {
    if (i == net.target) continue;
    in(pos++) = x_contemporaneous(i);
  }
  in.tail(net.lagged_inputs) = y_lagged;
  const Eigen::VectorXd u = net.first_layer * in + net.hidden_bias;
  double out = net.output_bias;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    out += net.output_weights(k) * activate(net.activation, u(k));
  }
  return out;
}

struct NonlinearConfig {
  int hidden_units = 10;
  double lambda1 = 0.005;  // group penalty on contemporaneous groups
  double lambda2 = 0.01;   // group penalty on lagged groups
  double ridge = 1e-4;     // l2 on biases and output layer
  double rho0 = 1.0;
  double alpha0 = 0.0;
  double rho_max = 1e16;
  double eta_tol = 1e-10;
  double c = 0.25;
  double q = 10.0;
  int max_outer = 100;
  double inner_tol = 1e-6;
  int inner_max_iter = 300;
  int lbfgs_memory = 10;
  std::uint64_t seed = 0;  // initialization seed; results are bit-stable per seed
  double init_scale = 0.1;
  Activation activation = Activation::Sigmoid;

  void validate() const {
    if (hidden_units < 1) throw DataError("hidden_units must be >= 1");
    if (lambda1 < 0 || lambda2 < 0 || ridge < 0) {
      throw DataError("penalty weights must be >= 0");
    }
    if (!(rho0 > 0) || !(rho0 < rho_max)) {
      throw DataError("nonlinear config requires 0 < rho0 < rho_max");
    }
    if (!(eta_tol > 0)) throw DataError("eta_tol must be > 0");
    if (!(c > 0 && c < 1) || !(q > 1)) {
      throw DataError("progress parameters must satisfy c in (0,1), q > 1");
    }
  }
};

struct NonlinearFitResult {
  std::vector<TargetNetwork> networks;
  Eigen::MatrixXd W_derived;  // d x d, nonnegative, zero diagonal
  Eigen::MatrixXd A_derived;  // (L*d) x d, nonnegative
  Eigen::VectorXd target_losses;  // weighted squared residual per target
  Eigen::Index t = 0;
  double bandwidth = 0.0;
  double loss = 0.0;
  double eta = 0.0;
  int outer_iterations = 0;
  bool converged = false;
};

inline std::vector<TargetNetwork> make_networks(int d, int lag_inputs,
                                                const NonlinearConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<TargetNetwork> nets(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    TargetNetwork& net = nets[static_cast<std::size_t>(j)];
    net.target = j;
    net.d = d;
    net.lagged_inputs = lag_inputs;
    net.activation = cfg.activation;
    net.first_layer.resize(cfg.hidden_units, d - 1 + lag_inputs);
    net.hidden_bias.resize(cfg.hidden_units);
    net.output_weights.resize(cfg.hidden_units);
    for (Eigen::Index c = 0; c < net.first_layer.cols(); ++c) {
      for (Eigen::Index r = 0; r < net.first_layer.rows(); ++r) {
        net.first_layer(r, c) = rng.uniform(-cfg.init_scale, cfg.init_scale);
      }
    }
    for (int k = 0; k < cfg.hidden_units; ++k) {
      net.hidden_bias(k) = rng.uniform(-cfg.init_scale, cfg.init_scale);
    }
    for (int k = 0; k < cfg.hidden_units; ++k) {
      net.output_weights(k) = rng.uniform(-cfg.init_scale, cfg.init_scale);
    }
    net.output_bias = rng.uniform(-cfg.init_scale, cfg.init_scale);
  }
  return nets;
}

// Derived adjacency matrices from the first-layer group norms.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> derived_adjacency(
    const std::vector<TargetNetwork>& nets) {
  if (nets.empty()) throw DataError("no networks");
  const int d = nets.front().d;
  const int lag_inputs = nets.front().lagged_inputs;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(lag_inputs, d);
  for (const auto& net : nets) {
    const int j = net.target;
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      W(i, j) = net.first_layer.col(net.contemporaneous_column(i)).norm();
    }
    for (int r = 0; r < lag_inputs; ++r) {
      A(r, j) = net.first_layer.col(net.lagged_column(r)).norm();
    }
  }
  return {W, A};
}

namespace detail {

inline Eigen::Index network_param_count(const TargetNetwork& net) {
  return net.first_layer.size() + 2 * net.hidden_bias.size() + 1;
}

}  // namespace detail

inline Eigen::VectorXd pack_networks(const std::vector<TargetNetwork>& nets) {
  Eigen::Index total = 0;
  for (const auto& net : nets) total += detail::network_param_count(net);
  Eigen::VectorXd z(total);
  Eigen::Index off = 0;
  for (const auto& net : nets) {
    const Eigen::Index fl = net.first_layer.size();
    const Eigen::Index m = net.hidden_bias.size();
    z.segment(off, fl) = Eigen::Map<const Eigen::VectorXd>(
        net.first_layer.data(), fl);
    z.segment(off + fl, m) = net.hidden_bias;
    z.segment(off + fl + m, m) = net.output_weights;
    z(off + fl + 2 * m) = net.output_bias;
    off += detail::network_param_count(net);
  }
  return z;
}

inline void unpack_networks(const Eigen::VectorXd& z,
                            std::vector<TargetNetwork>& nets) {
  Eigen::Index off = 0;
  for (auto& net : nets) {
    const Eigen::Index fl = net.first_layer.size();
    const Eigen::Index m = net.hidden_bias.size();
    Eigen::Map<Eigen::VectorXd>(net.first_layer.data(), fl) =
        z.segment(off, fl);
    net.hidden_bias = z.segment(off + fl, m);
    net.output_weights = z.segment(off + fl + m, m);
    net.output_bias = z(off + fl + 2 * m);
    off += detail::network_param_count(net);
  }
}

// Batch input matrix for one network: usable rows x (d-1 + L*d).
inline Eigen::MatrixXd network_inputs(const TargetNetwork& net,
                                      const LaggedView& lagged) {
  const Eigen::Index n = lagged.n();
  Eigen::MatrixXd in(n, net.inputs());
  Eigen::Index pos = 0;
  for (int i = 0; i < net.d; ++i) {
    if (i == net.target) continue;
    in.col(pos++) = lagged.aligned_targets.col(i);
  }
  in.rightCols(net.lagged_inputs) = lagged.rows;
  return in;
}

// Predictions for every usable row and target.
inline Eigen::MatrixXd nonlinear_predictions(
    const std::vector<TargetNetwork>& nets, const LaggedView& lagged) {
  const Eigen::Index n = lagged.n();
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(nets.size()));
  for (const auto& net : nets) {
    const Eigen::MatrixXd in = network_inputs(net, lagged);
    Eigen::MatrixXd u =
        (in * net.first_layer.transpose()).rowwise() + net.hidden_bias.transpose();
    u = u.unaryExpr([&](double v) { return activate(net.activation, v); });
    out.col(net.target) =
        ((u * net.output_weights).array() + net.output_bias).matrix();
  }
  return out;
}

struct NonlinearObjective {
  double value = 0.0;
  Eigen::VectorXd gradient;  // packed like pack_networks
  double h = 0.0;            // H(W_derived)
  Eigen::VectorXd target_quadratics;
};

// Full objective: kernel-weighted squared residuals, group-lasso on the
// first-layer groups (subgradient zero for a group at zero), ridge on the
// remaining parameters, and the augmented-Lagrangian acyclicity terms on
// the derived instantaneous graph. The H chain rule through the squared
// group norms is smooth, so only the group-lasso term is kinked.
inline NonlinearObjective nonlinear_objective_and_gradient(
    const std::vector<TargetNetwork>& nets, const LaggedView& lagged,
    const Eigen::VectorXd& weights, const NonlinearConfig& cfg, double rho,
    double alpha) {
  const Eigen::Index n = lagged.n();
  const auto d = static_cast<int>(lagged.d());
  if (static_cast<int>(nets.size()) != d) {
    throw DataError("need one network per variable");
  }
  if (weights.size() != n) {
    throw DataError("weight vector length does not match usable rows");
  }

  auto [Wd, Ad] = derived_adjacency(nets);
  const Eigen::MatrixXd B = Wd.cwiseProduct(Wd);
  if (B.cwiseAbs().colwise().sum().maxCoeff() > 600.0) {
    NonlinearObjective inf_out;
    inf_out.value = std::numeric_limits<double>::infinity();
    Eigen::Index total = 0;
    for (const auto& net : nets) total += detail::network_param_count(net);
    inf_out.gradient = Eigen::VectorXd::Zero(total);
    inf_out.h = std::numeric_limits<double>::infinity();
    inf_out.target_quadratics = Eigen::VectorXd::Zero(d);
    return inf_out;
  }
  const Eigen::MatrixXd E = matrix_exp(B);
  const double h = E.trace() - static_cast<double>(d);
  const double h_scale = rho * h + alpha;

  NonlinearObjective out;
  out.h = h;
  out.target_quadratics = Eigen::VectorXd::Zero(d);

  std::vector<Eigen::VectorXd> grads(nets.size());
  double value = 0.5 * rho * h * h + alpha * h;

  for (const auto& net : nets) {
    const int j = net.target;
    const Eigen::Index m = net.hidden_bias.size();
    const Eigen::MatrixXd in = network_inputs(net, lagged);

    Eigen::MatrixXd u =
        (in * net.first_layer.transpose()).rowwise() + net.hidden_bias.transpose();
    Eigen::MatrixXd hid =
        u.unaryExpr([&](double v) { return activate(net.activation, v); });
    const Eigen::VectorXd pred =
        ((hid * net.output_weights).array() + net.output_bias).matrix();
    const Eigen::VectorXd res = lagged.aligned_targets.col(j) - pred;

    const double quad = (res.array().square() * weights.array()).sum();
    out.target_quadratics(j) = quad;
    value += quad;

    const Eigen::VectorXd dout =
        (-2.0 * weights.array() * res.array()).matrix();
    Eigen::VectorXd g_w2 = hid.transpose() * dout;
    double g_b2 = dout.sum();
    Eigen::MatrixXd dU = dout * net.output_weights.transpose();
    if (net.activation == Activation::Sigmoid) {
      dU.array() *= hid.array() * (1.0 - hid.array());
    }
    Eigen::MatrixXd g_fl = dU.transpose() * in;  // m x inputs
    Eigen::VectorXd g_b1 = dU.colwise().sum().transpose();

    // Group penalties and the acyclicity chain through ||phi||^2.
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      const Eigen::Index col = net.contemporaneous_column(i);
      const double norm = net.first_layer.col(col).norm();
      value += cfg.lambda1 * norm;
      if (norm > 0.0) {
        g_fl.col(col) += (cfg.lambda1 / norm) * net.first_layer.col(col);
      }
      g_fl.col(col) += h_scale * 2.0 * E(j, i) * net.first_layer.col(col);
    }
    for (int r = 0; r < net.lagged_inputs; ++r) {
      const Eigen::Index col = net.lagged_column(r);
      const double norm = net.first_layer.col(col).norm();
      value += cfg.lambda2 * norm;
      if (norm > 0.0) {
        g_fl.col(col) += (cfg.lambda2 / norm) * net.first_layer.col(col);
      }
    }

    value += cfg.ridge * (net.hidden_bias.squaredNorm() +
                          net.output_weights.squaredNorm() +
                          net.output_bias * net.output_bias);
    g_b1 += 2.0 * cfg.ridge * net.hidden_bias;
    g_w2 += 2.0 * cfg.ridge * net.output_weights;
    g_b2 += 2.0 * cfg.ridge * net.output_bias;

    Eigen::VectorXd g(detail::network_param_count(net));
    g.segment(0, g_fl.size()) =
        Eigen::Map<const Eigen::VectorXd>(g_fl.data(), g_fl.size());
    g.segment(g_fl.size(), m) = g_b1;
    g.segment(g_fl.size() + m, m) = g_w2;
    g(g_fl.size() + 2 * m) = g_b2;
    grads[static_cast<std::size_t>(j)] = std::move(g);
  }

  Eigen::Index total = 0;
  for (const auto& g : grads) total += g.size();
  out.gradient.resize(total);
  Eigen::Index off = 0;
  for (const auto& g : grads) {
    out.gradient.segment(off, g.size()) = g;
    off += g.size();
  }
  out.value = value;
  return out;
}

// Core fit with an explicit per-usable-row weight vector; zero weights drop
// rows from the training objective entirely (used by cross-validation).
inline NonlinearFitResult fit_nonlinear_with_weights(
    Eigen::Index t, const LaggedView& lagged, const KernelSpec& kernel,
    const NonlinearConfig& cfg, const Eigen::VectorXd& w) {
  cfg.validate();
  kernel.validate();
  const Eigen::Index T = lagged.source_length();
  if (t < 1 || t > T) {
    throw DataError("fit time t=" + std::to_string(t) +
                    " outside [1, T=" + std::to_string(T) + "]");
  }
  const auto d = static_cast<int>(lagged.d());
  if (w.size() != lagged.n()) {
    throw DataError("weight vector length does not match usable rows");
  }
  if ((w.array() > 0.0).count() < d) {
    throw DataError("degenerate kernel weights at t=" + std::to_string(t) +
                    ": fewer than d=" + std::to_string(d) +
                    " points carry weight; increase the bandwidth");
  }

  std::vector<TargetNetwork> nets =
      make_networks(d, static_cast<int>(lagged.rows.cols()), cfg);
  Eigen::VectorXd z = pack_networks(nets);

  double rho = cfg.rho0;
  double alpha = cfg.alpha0;

  auto closure = [&](const Eigen::VectorXd& zv, Eigen::VectorXd& grad) {
    unpack_networks(zv, nets);
    NonlinearObjective obj =
        nonlinear_objective_and_gradient(nets, lagged, w, cfg, rho, alpha);
    grad = obj.gradient;
    return obj.value;
  };

  SolveOptions inner;
  inner.memory = cfg.lbfgs_memory;
  inner.max_iterations = cfg.inner_max_iter;
  inner.gradient_tol = cfg.inner_tol;

  const double inf = std::numeric_limits<double>::infinity();
  double eta_prev = inf;
  double eta_star = inf;
  int outer = 0;
  for (outer = 1; outer <= cfg.max_outer; ++outer) {
    Eigen::VectorXd z_candidate;
    for (;;) {
      z_candidate = z;
      minimize(closure, z_candidate, inner);
      unpack_networks(z_candidate, nets);
      eta_star = h_value(derived_adjacency(nets).first);
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

  unpack_networks(z, nets);
  NonlinearFitResult result;
  auto [Wd, Ad] = derived_adjacency(nets);
  result.W_derived = std::move(Wd);
  result.A_derived = std::move(Ad);
  result.t = t;
  result.bandwidth = kernel.bandwidth;
  result.eta = eta_star;
  result.outer_iterations = std::min(outer, cfg.max_outer);
  result.converged = eta_star < cfg.eta_tol;
  {
    const Eigen::MatrixXd pred = nonlinear_predictions(nets, lagged);
    const Eigen::MatrixXd res = lagged.aligned_targets - pred;
    result.target_losses = (res.array().square().colwise() * w.array())
                               .colwise()
                               .sum()
                               .matrix()
                               .transpose();
    double penalties = 0.0;
    for (const auto& net : nets) {
      for (int i = 0; i < d; ++i) {
        if (i == net.target) continue;
        penalties += cfg.lambda1 *
                     net.first_layer.col(net.contemporaneous_column(i)).norm();
      }
      for (int r = 0; r < net.lagged_inputs; ++r) {
        penalties += cfg.lambda2 * net.first_layer.col(net.lagged_column(r)).norm();
      }
    }
    result.loss = result.target_losses.sum() + penalties;
  }
  result.networks = std::move(nets);
  return result;
}

inline NonlinearFitResult fit_at_nonlinear(Eigen::Index t,
                                           const LaggedView& lagged,
                                           const KernelSpec& kernel,
                                           const NonlinearConfig& cfg) {
  kernel.validate();
  return fit_nonlinear_with_weights(t, lagged, kernel, cfg,
                                    usable_weights(kernel, t, lagged));
}

inline std::vector<NonlinearFitResult> fit_path_nonlinear(
    const std::vector<Eigen::Index>& times, const LaggedView& lagged,
    const KernelSpec& kernel, const NonlinearConfig& cfg, int jobs = 1) {
  std::vector<NonlinearFitResult> results(times.size());
  detail::parallel_for(
      static_cast<Eigen::Index>(times.size()), jobs, [&](Eigen::Index i) {
        try {
          results[static_cast<std::size_t>(i)] = fit_at_nonlinear(
              times[static_cast<std::size_t>(i)], lagged, kernel, cfg);
        } catch (const std::exception& e) {
          throw DataError("fit at t=" +
                          std::to_string(times[static_cast<std::size_t>(i)]) +
                          " failed: " + e.what());
        }
      });
  return results;
}

}  // namespace dynamo
