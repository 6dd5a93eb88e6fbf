// JSON schemas for fit outputs, simulated truth, metric reports and the
// per-run manifest.
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynamo/errors.hpp"
#include "dynamo/linear.hpp"
#include "dynamo/metrics.hpp"
#include "dynamo/nonlinear.hpp"
#include "dynamo/simulate.hpp"

namespace dynamo {

using Json = nlohmann::json;

inline Json matrix_to_json(const Eigen::MatrixXd& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json matrix_to_json(const Eigen::MatrixXi& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd json_to_matrix(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw DataError("expected a JSON array of arrays");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("ragged JSON matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return M;
}

inline Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Eigen::VectorXd json_to_vector(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

inline void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError("invalid JSON in " + path + ": " + e.what());
  }
}

// ---- fits ----------------------------------------------------------------

inline Json network_to_json(const TargetNetwork& net) {
  return Json{{"target", net.target},
              {"d", net.d},
              {"lagged_inputs", net.lagged_inputs},
              {"first_layer", matrix_to_json(net.first_layer)},
              {"hidden_bias", vector_to_json(net.hidden_bias)},
              {"output_weights", vector_to_json(net.output_weights)},
              {"output_bias", net.output_bias}};
}

inline TargetNetwork network_from_json(const Json& j) {
  TargetNetwork net;
  net.target = j.at("target").get<int>();
  net.d = j.at("d").get<int>();
  net.lagged_inputs = j.at("lagged_inputs").get<int>();
  net.first_layer = json_to_matrix(j.at("first_layer"));
  net.hidden_bias = json_to_vector(j.at("hidden_bias"));
  net.output_weights = json_to_vector(j.at("output_weights"));
  net.output_bias = j.at("output_bias").get<double>();
  return net;
}

inline Json fits_to_json(const std::vector<FitResult>& fits, int lag,
                         KernelFamily family, double threshold_used,
                         const std::vector<std::string>& variable_names) {
  Json out{{"model", "linear"},
           {"lag", lag},
           {"kernel", to_string(family)},
           {"threshold", threshold_used},
           {"variable_names", variable_names}};
  Json items = Json::array();
  for (const auto& fit : fits) {
    items.push_back(Json{{"t", fit.t},
                         {"bandwidth", fit.bandwidth},
                         {"W", matrix_to_json(fit.params.W)},
                         {"A", matrix_to_json(fit.params.A)},
                         {"loss", fit.loss},
                         {"eta", fit.eta},
                         {"converged", fit.converged},
                         {"outer_iterations", fit.outer_iterations}});
  }
  out["fits"] = std::move(items);
  return out;
}

inline Json fits_to_json(const std::vector<NonlinearFitResult>& fits, int lag,
                         KernelFamily family, double threshold_used,
                         const std::vector<std::string>& variable_names) {
  Json out{{"model", "nonlinear"},
           {"lag", lag},
           {"kernel", to_string(family)},
           {"threshold", threshold_used},
           {"variable_names", variable_names}};
  Json items = Json::array();
  for (const auto& fit : fits) {
    Json nets = Json::array();
    for (const auto& net : fit.networks) nets.push_back(network_to_json(net));
    items.push_back(Json{{"t", fit.t},
                         {"bandwidth", fit.bandwidth},
                         {"W", matrix_to_json(fit.W_derived)},
                         {"A", matrix_to_json(fit.A_derived)},
                         {"loss", fit.loss},
                         {"eta", fit.eta},
                         {"converged", fit.converged},
                         {"outer_iterations", fit.outer_iterations},
                         {"target_losses", vector_to_json(fit.target_losses)},
                         {"networks", std::move(nets)}});
  }
  out["fits"] = std::move(items);
  return out;
}

struct LoadedFit {
  Eigen::Index t = 0;
  double bandwidth = 0.0;
  Eigen::MatrixXd W;
  Eigen::MatrixXd A;
  double loss = 0.0;
  double eta = 0.0;
  bool converged = false;
  std::vector<TargetNetwork> networks;  // nonlinear only
};

struct LoadedFits {
  std::string model;
  int lag = 1;
  double threshold = 0.0;
  std::vector<std::string> variable_names;
  std::vector<LoadedFit> fits;
};

inline LoadedFits load_fits(const std::string& path) {
  const Json j = read_json_file(path);
  LoadedFits out;
  out.model = j.at("model").get<std::string>();
  out.lag = j.at("lag").get<int>();
  out.threshold = j.value("threshold", 0.0);
  out.variable_names =
      j.value("variable_names", std::vector<std::string>{});
  for (const auto& item : j.at("fits")) {
    LoadedFit fit;
    fit.t = item.at("t").get<Eigen::Index>();
    fit.bandwidth = item.at("bandwidth").get<double>();
    fit.W = json_to_matrix(item.at("W"));
    fit.A = json_to_matrix(item.at("A"));
    fit.loss = item.value("loss", 0.0);
    fit.eta = item.value("eta", 0.0);
    fit.converged = item.value("converged", false);
    if (item.contains("networks")) {
      for (const auto& nj : item.at("networks")) {
        fit.networks.push_back(network_from_json(nj));
      }
    }
    out.fits.push_back(std::move(fit));
  }
  return out;
}

// ---- simulated truth -------------------------------------------------------

inline Json truth_to_json(const SimulatedData& data) {
  const GroundTruthProcess& gt = data.process;
  Json out{{"d", gt.d},
           {"T", gt.T},
           {"lag", gt.L},
           {"mode", to_string(gt.mode)},
           {"noise", to_string(gt.noise)},
           {"seed", gt.seed},
           {"gamma", gt.gamma},
           {"phi", gt.phi},
           {"support_W", matrix_to_json(gt.support_W)},
           {"support_A", matrix_to_json(gt.support_A)},
           {"delta_W", matrix_to_json(gt.delta_W)},
           {"delta_A", matrix_to_json(gt.delta_A)}};
  Json graphs = Json::array();
  for (std::size_t k = 0; k < data.true_W.size(); ++k) {
    graphs.push_back(Json{{"t", k + 1},
                          {"W", matrix_to_json(data.true_W[k])},
                          {"A", matrix_to_json(data.true_A[k])}});
  }
  out["graphs"] = std::move(graphs);
  return out;
}

struct LoadedTruth {
  int d = 0;
  int T = 0;
  int lag = 1;
  std::vector<Eigen::MatrixXd> W;  // indexed by t-1
  std::vector<Eigen::MatrixXd> A;
};

inline LoadedTruth load_truth(const std::string& path) {
  const Json j = read_json_file(path);
  LoadedTruth out;
  out.d = j.at("d").get<int>();
  out.T = j.at("T").get<int>();
  out.lag = j.at("lag").get<int>();
  out.W.resize(static_cast<std::size_t>(out.T));
  out.A.resize(static_cast<std::size_t>(out.T));
  for (const auto& g : j.at("graphs")) {
    const auto t = g.at("t").get<std::size_t>();
    if (t < 1 || t > static_cast<std::size_t>(out.T)) {
      throw DataError("truth graph with t outside [1, T]");
    }
    out.W[t - 1] = json_to_matrix(g.at("W"));
    out.A[t - 1] = json_to_matrix(g.at("A"));
  }
  return out;
}

// ---- metric reports --------------------------------------------------------

inline Json report_to_json(const MetricsReport& report) {
  return Json{{"shd", report.shd},
              {"precision", report.precision},
              {"recall", report.recall},
              {"f1", report.f1}};
}

// ---- manifest ----------------------------------------------------------

// Every run writes <output>.manifest.json recording the resolved
// configuration; rerunning the stored argv reproduces the outputs for the
// deterministic paths.
inline void write_manifest(const std::string& output_path,
                           const std::string& subcommand,
                           const std::vector<std::string>& argv,
                           const Json& resolved_config,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
  Json manifest{{"tool", "dynamo"},
#ifdef DYNAMO_VERSION
                {"version", DYNAMO_VERSION},
#else
                {"version", "unknown"},
#endif
                {"subcommand", subcommand},
                {"argv", argv},
                {"config", resolved_config},
                {"inputs", inputs},
                {"outputs", outputs}};
  write_json_file(manifest, output_path + ".manifest.json");
}

}  // namespace dynamo
