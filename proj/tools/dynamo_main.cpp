// Command-line frontend: simulate, fit, cv, eval, predict, ingest,
// benchmark and rerun, with JSON/CSV in and out and a manifest written next
// to every output. Exit codes: 0 success, 1 usage error, 2 data/validation
// error, 3 solver non-convergence under --strict.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "dynamo/bandwidth.hpp"
#include "dynamo/benchmark.hpp"
#include "dynamo/errors.hpp"
#include "dynamo/event_data.hpp"
#include "dynamo/kernel.hpp"
#include "dynamo/linear.hpp"
#include "dynamo/metrics.hpp"
#include "dynamo/nonlinear.hpp"
#include "dynamo/serialize.hpp"
#include "dynamo/simulate.hpp"
#include "dynamo/time_series.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNotConverged = 3;

// Accepts "1,30,60,90" or "10:90:10" (start:stop:step, stop inclusive).
std::vector<Eigen::Index> parse_times(const std::string& text) {
  std::vector<Eigen::Index> times;
  if (text.find(':') != std::string::npos) {
    long start = 0, stop = 0, step = 1;
    if (std::sscanf(text.c_str(), "%ld:%ld:%ld", &start, &stop, &step) != 3 ||
        step <= 0) {
      throw dynamo::DataError("cannot parse time range '" + text +
                              "' (expected start:stop:step)");
    }
    for (long t = start; t <= stop; t += step) times.push_back(t);
  } else {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      times.push_back(std::stol(tok));
    }
  }
  if (times.empty()) {
    throw dynamo::DataError("no time points in '" + text + "'");
  }
  return times;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double start = 0, stop = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 ||
        step <= 0) {
      throw dynamo::DataError("cannot parse grid '" + text +
                              "' (expected start:stop:step)");
    }
    for (double h = start; h <= stop + 1e-12; h += step) grid.push_back(h);
  } else {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      grid.push_back(std::stod(tok));
    }
  }
  if (grid.empty()) throw dynamo::DataError("empty bandwidth grid");
  return grid;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

int default_jobs() {
  if (const char* env = std::getenv("DYNAMO_JOBS")) {
    const int jobs = std::atoi(env);
    if (jobs > 0) return jobs;
  }
  return 1;
}

int run(const std::vector<std::string>& args);

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
  dynamo::SimulationSpec spec;
  std::string mode = "linear";
  std::string noise = "gaussian";
  std::string out;
  std::string truth;
};

int run_simulate(SimulateArgs& a, const std::vector<std::string>& argv) {
  a.spec.mode = a.mode == "nonlinear" ? dynamo::SemMode::Nonlinear
                                      : dynamo::SemMode::Linear;
  a.spec.noise = a.noise == "uniform" ? dynamo::NoiseKind::Uniform
                                      : dynamo::NoiseKind::Gaussian;
  const dynamo::SimulatedData data = dynamo::simulate(a.spec);
  dynamo::save_csv(data.series, a.out);
  std::vector<std::string> outputs{a.out};
  if (!a.truth.empty()) {
    dynamo::write_json_file(dynamo::truth_to_json(data), a.truth);
    outputs.push_back(a.truth);
  }
  dynamo::Json config{{"d", a.spec.d},
                      {"T", a.spec.T},
                      {"lag", a.spec.L},
                      {"mode", a.mode},
                      {"noise", a.noise},
                      {"seed", a.spec.seed},
                      {"gamma", a.spec.gamma},
                      {"phi", a.spec.resolved_phi()}};
  dynamo::write_manifest(a.out, "simulate", argv, config, {}, outputs);
  std::cout << "wrote " << a.out;
  if (!a.truth.empty()) std::cout << " and " << a.truth;
  std::cout << '\n';
  return kExitOk;
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
  std::string input;
  bool no_header = false;
  std::string times_text;
  int lag = 1;
  std::string model = "linear";
  std::string kernel = "epanechnikov";
  double bandwidth = 0.5;
  double lambda1 = 0.05;
  double lambda2 = 0.05;
  double eta_tol = 1e-5;
  double threshold = 0.05;
  int hidden_units = 10;
  int max_outer = 100;
  std::uint64_t seed = 0;
  int jobs = default_jobs();
  bool strict = false;
  std::string out;
  // model-dependent defaults apply when the flags were not given
  bool lambda1_given = false;
  bool lambda2_given = false;
  bool eta_tol_given = false;
};

int run_fit(FitArgs& a, const std::vector<std::string>& argv) {
  const dynamo::TimeSeriesMatrix series =
      dynamo::load_csv(a.input, !a.no_header);
  const dynamo::LaggedView lagged = dynamo::build_lagged(series, a.lag);
  const std::vector<Eigen::Index> times = parse_times(a.times_text);
  const dynamo::KernelSpec kernel{dynamo::kernel_family_from_string(a.kernel),
                                  a.bandwidth};

  bool all_converged = true;
  dynamo::Json fits_json;
  if (a.model == "linear") {
    dynamo::SolverConfig cfg;
    cfg.lambda1 = a.lambda1;
    cfg.lambda2 = a.lambda2;
    cfg.eta_tol = a.eta_tol;
    cfg.max_outer = a.max_outer;
    std::vector<dynamo::FitResult> fits =
        dynamo::fit_path(times, lagged, kernel, cfg, a.jobs);
    for (auto& fit : fits) {
      all_converged = all_converged && fit.converged;
      fit.params = dynamo::threshold(fit.params, a.threshold);
    }
    fits_json = dynamo::fits_to_json(fits, a.lag, kernel.family, a.threshold,
                                     series.variable_names);
  } else if (a.model == "nonlinear") {
    dynamo::NonlinearConfig cfg;
    if (a.lambda1_given) cfg.lambda1 = a.lambda1;
    if (a.lambda2_given) cfg.lambda2 = a.lambda2;
    if (a.eta_tol_given) cfg.eta_tol = a.eta_tol;
    cfg.hidden_units = a.hidden_units;
    cfg.max_outer = a.max_outer;
    cfg.seed = a.seed;
    std::vector<dynamo::NonlinearFitResult> fits =
        dynamo::fit_path_nonlinear(times, lagged, kernel, cfg, a.jobs);
    for (auto& fit : fits) {
      all_converged = all_converged && fit.converged;
      const dynamo::LinearParams cut = dynamo::threshold(
          {fit.W_derived, fit.A_derived}, a.threshold);
      fit.W_derived = cut.W;
      fit.A_derived = cut.A;
    }
    fits_json = dynamo::fits_to_json(fits, a.lag, kernel.family, a.threshold,
                                     series.variable_names);
  } else {
    throw dynamo::DataError("unknown model '" + a.model + "'");
  }

  dynamo::write_json_file(fits_json, a.out);
  dynamo::Json config{{"model", a.model},        {"lag", a.lag},
                      {"kernel", a.kernel},      {"bandwidth", a.bandwidth},
                      {"lambda1", a.lambda1},    {"lambda2", a.lambda2},
                      {"eta_tol", a.eta_tol},    {"threshold", a.threshold},
                      {"seed", a.seed},          {"jobs", a.jobs},
                      {"hidden_units", a.hidden_units},
                      {"times", a.times_text},   {"no_header", a.no_header}};
  dynamo::write_manifest(a.out, "fit", argv, config, {a.input}, {a.out});
  std::cout << "wrote " << a.out << '\n';
  if (a.strict && !all_converged) {
    std::cerr << "warning: at least one fit did not converge\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

// ---- cv ---------------------------------------------------------------------

struct CvArgs {
  std::string input;
  bool no_header = false;
  std::string times_text;
  int lag = 1;
  std::string model = "linear";
  std::string kernel = "epanechnikov";
  std::string grid_text = "0.1:0.9:0.1";
  int folds = 5;
  std::uint64_t seed = 0;
  double lambda1 = 0.05;
  double lambda2 = 0.05;
  double eta_tol = 1e-5;
  int hidden_units = 10;
  std::string out;
};

int run_cv(CvArgs& a, const std::vector<std::string>& argv) {
  const dynamo::TimeSeriesMatrix series =
      dynamo::load_csv(a.input, !a.no_header);
  const dynamo::LaggedView lagged = dynamo::build_lagged(series, a.lag);
  const std::vector<Eigen::Index> times = parse_times(a.times_text);

  dynamo::CVConfig cv;
  cv.grid = parse_grid(a.grid_text);
  cv.folds = a.folds;
  cv.seed = a.seed;
  cv.model = a.model == "nonlinear" ? dynamo::ModelKind::Nonlinear
                                    : dynamo::ModelKind::Linear;
  cv.family = dynamo::kernel_family_from_string(a.kernel);

  dynamo::SolverConfig solver;
  solver.lambda1 = a.lambda1;
  solver.lambda2 = a.lambda2;
  solver.eta_tol = a.eta_tol;
  dynamo::NonlinearConfig nonlinear;
  nonlinear.hidden_units = a.hidden_units;
  nonlinear.seed = a.seed;

  dynamo::Json results = dynamo::Json::array();
  for (const Eigen::Index t : times) {
    const dynamo::BandwidthSelection sel =
        dynamo::select_bandwidth(t, lagged, cv, solver, nonlinear);
    dynamo::Json losses = dynamo::Json::array();
    for (double v : sel.cv_losses) {
      if (std::isnan(v)) {
        losses.push_back(nullptr);
      } else {
        losses.push_back(v);
      }
    }
    results.push_back(dynamo::Json{{"t", t},
                                   {"chosen", sel.chosen},
                                   {"grid", cv.grid},
                                   {"cv_losses", std::move(losses)},
                                   {"warnings", sel.warnings}});
  }
  dynamo::Json out{{"model", a.model},
                   {"folds", a.folds},
                   {"seed", a.seed},
                   {"results", std::move(results)}};
  dynamo::write_json_file(out, a.out);
  dynamo::Json config{{"model", a.model},   {"lag", a.lag},
                      {"kernel", a.kernel}, {"grid", a.grid_text},
                      {"folds", a.folds},   {"seed", a.seed},
                      {"times", a.times_text}};
  dynamo::write_manifest(a.out, "cv", argv, config, {a.input}, {a.out});
  std::cout << "wrote " << a.out << '\n';
  return kExitOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string est;
  std::string truth;
  double threshold = 0.05;
  std::string out;
};

int run_eval(EvalArgs& a, const std::vector<std::string>& argv) {
  const dynamo::LoadedFits fits = dynamo::load_fits(a.est);
  const dynamo::LoadedTruth truth = dynamo::load_truth(a.truth);
  if (fits.fits.empty()) {
    throw dynamo::DataError("no fits in " + a.est);
  }

  dynamo::Json results = dynamo::Json::array();
  std::vector<double> inst_f1, inst_shd, lag_f1, lag_shd;
  for (const auto& fit : fits.fits) {
    if (fit.t < 1 || fit.t > truth.T) {
      throw dynamo::DataError("fit at t=" + std::to_string(fit.t) +
                              " has no matching truth graph");
    }
    const auto& tw = truth.W[static_cast<std::size_t>(fit.t - 1)];
    const auto& ta = truth.A[static_cast<std::size_t>(fit.t - 1)];
    const dynamo::BinaryGraph est_graph =
        dynamo::binarize(dynamo::LinearParams{fit.W, fit.A}, a.threshold);
    const dynamo::BinaryGraph truth_graph =
        dynamo::binarize(dynamo::LinearParams{tw, ta}, 0.0);
    const dynamo::MetricsReport mi =
        dynamo::f1_score(est_graph.instantaneous, truth_graph.instantaneous,
                         dynamo::GraphComponent::Instantaneous);
    const dynamo::MetricsReport ml =
        dynamo::f1_score(est_graph.lagged, truth_graph.lagged,
                         dynamo::GraphComponent::Lagged);
    inst_f1.push_back(mi.f1);
    inst_shd.push_back(mi.shd);
    lag_f1.push_back(ml.f1);
    lag_shd.push_back(ml.shd);
    results.push_back(dynamo::Json{{"t", fit.t},
                                   {"instantaneous", dynamo::report_to_json(mi)},
                                   {"lagged", dynamo::report_to_json(ml)}});
  }
  dynamo::Json out{
      {"threshold", a.threshold},
      {"results", std::move(results)},
      {"summary",
       dynamo::Json{{"instantaneous",
                     dynamo::Json{{"median_shd", dynamo::median(inst_shd)},
                                  {"median_f1", dynamo::median(inst_f1)}}},
                    {"lagged",
                     dynamo::Json{{"median_shd", dynamo::median(lag_shd)},
                                  {"median_f1", dynamo::median(lag_f1)}}}}}};
  dynamo::write_json_file(out, a.out);
  dynamo::Json config{{"threshold", a.threshold}};
  dynamo::write_manifest(a.out, "eval", argv, config, {a.est, a.truth},
                         {a.out});
  std::cout << "wrote " << a.out << '\n';
  return kExitOk;
}

// ---- predict ------------------------------------------------------------------

struct PredictArgs {
  std::string fits;
  std::string input;
  bool no_header = false;
  std::string target;
  std::string out;
};

int run_predict(PredictArgs& a, const std::vector<std::string>& argv) {
  const dynamo::LoadedFits loaded = dynamo::load_fits(a.fits);
  const dynamo::TimeSeriesMatrix series =
      dynamo::load_csv(a.input, !a.no_header);
  const dynamo::LaggedView lagged = dynamo::build_lagged(series, loaded.lag);

  Eigen::Index target = -1;
  for (std::size_t j = 0; j < series.variable_names.size(); ++j) {
    if (series.variable_names[j] == a.target) {
      target = static_cast<Eigen::Index>(j);
    }
  }
  if (target < 0) {
    throw dynamo::DataError("target variable '" + a.target +
                            "' not found in the input columns");
  }

  double mse = 0.0;
  if (loaded.model == "nonlinear") {
    std::vector<dynamo::NonlinearFitResult> fits;
    for (const auto& f : loaded.fits) {
      if (f.networks.empty()) {
        throw dynamo::DataError("nonlinear fits file carries no networks");
      }
      dynamo::NonlinearFitResult r;
      r.t = f.t;
      r.networks = f.networks;
      fits.push_back(std::move(r));
    }
    mse = dynamo::predict_mse(fits, lagged, target);
  } else {
    std::vector<dynamo::FitResult> fits;
    for (const auto& f : loaded.fits) {
      dynamo::FitResult r;
      r.t = f.t;
      r.params = {f.W, f.A};
      fits.push_back(std::move(r));
    }
    mse = dynamo::predict_mse(fits, lagged, target);
  }

  dynamo::Json out{{"target", a.target},
                   {"target_index", target},
                   {"model", loaded.model},
                   {"n_fits", loaded.fits.size()},
                   {"mse", mse}};
  dynamo::write_json_file(out, a.out);
  dynamo::Json config{{"target", a.target}};
  dynamo::write_manifest(a.out, "predict", argv, config, {a.fits, a.input},
                         {a.out});
  std::cout << "mse " << mse << "\nwrote " << a.out << '\n';
  return kExitOk;
}

// ---- ingest --------------------------------------------------------------------

struct IngestArgs {
  std::string events;
  std::string team;
  bool strict_missing = false;
  bool bin_added_time = false;
  std::string out;
};

int run_ingest(IngestArgs& a, const std::vector<std::string>& argv) {
  const dynamo::MatchEventTable table = dynamo::load_event_csv(a.events);
  dynamo::EventOptions opts;
  opts.strict_missing = a.strict_missing;
  opts.bin_added_time = a.bin_added_time;
  const dynamo::TimeSeriesMatrix series =
      dynamo::home_away_difference(table, a.team, opts);
  dynamo::save_csv(series, a.out);
  dynamo::Json config{{"team", a.team},
                      {"strict_missing", a.strict_missing},
                      {"bin_added_time", a.bin_added_time}};
  dynamo::write_manifest(a.out, "ingest", argv, config, {a.events}, {a.out});
  std::cout << "wrote " << a.out << '\n';
  return kExitOk;
}

// ---- benchmark ---------------------------------------------------------------

struct BenchmarkArgs {
  std::string d_text = "5";
  int T = 500;
  std::string times_text = "60";
  int seeds = 20;
  std::uint64_t base_seed = 24;
  std::string mode = "linear";
  std::string noise = "gaussian";
  int lag = 1;
  double gamma = 0.05;
  double phi_scale = 0.0;
  double threshold = 0.05;
  std::string models_text = "linear,baseline";
  std::string grid_text = "0.1:0.9:0.1";
  int folds = 5;
  double nonlinear_bandwidth = 0.5;
  double eta_tol = 1e-3;
  int jobs = default_jobs();
  std::string out;
};

int run_benchmark_cmd(BenchmarkArgs& a, const std::vector<std::string>& argv) {
  dynamo::BenchmarkSpec spec;
  spec.d_values.clear();
  for (const auto& tok : split_names(a.d_text)) {
    spec.d_values.push_back(std::stoi(tok));
  }
  spec.T = a.T;
  spec.times = parse_times(a.times_text);
  spec.n_seeds = a.seeds;
  spec.base_seed = a.base_seed;
  spec.mode = a.mode == "nonlinear" ? dynamo::SemMode::Nonlinear
                                    : dynamo::SemMode::Linear;
  spec.noise = a.noise == "uniform" ? dynamo::NoiseKind::Uniform
                                    : dynamo::NoiseKind::Gaussian;
  spec.L = a.lag;
  spec.gamma = a.gamma;
  spec.phi_scale = a.phi_scale;
  spec.threshold = a.threshold;
  spec.models = split_names(a.models_text);
  spec.cv_grid = parse_grid(a.grid_text);
  spec.folds = a.folds;
  spec.nonlinear_bandwidth = a.nonlinear_bandwidth;
  spec.jobs = a.jobs;
  spec.solver.eta_tol = a.eta_tol;

  const dynamo::BenchmarkReport report = dynamo::run_benchmark(spec);
  std::ofstream fout(a.out);
  if (!fout) throw dynamo::DataError("cannot write file: " + a.out);
  fout << dynamo::benchmark_csv(report);
  fout.close();
  dynamo::Json config{{"d", a.d_text},        {"T", a.T},
                      {"times", a.times_text}, {"seeds", a.seeds},
                      {"base_seed", a.base_seed},
                      {"mode", a.mode},        {"noise", a.noise},
                      {"lag", a.lag},          {"models", a.models_text},
                      {"threshold", a.threshold}};
  dynamo::write_manifest(a.out, "benchmark", argv, config, {}, {a.out});
  std::cout << "wrote " << a.out << '\n';
  return kExitOk;
}

// ---- rerun ----------------------------------------------------------------

int run_rerun(const std::string& manifest_path) {
  const dynamo::Json manifest = dynamo::read_json_file(manifest_path);
  if (!manifest.contains("argv")) {
    throw dynamo::DataError("manifest has no argv record");
  }
  std::vector<std::string> argv;
  for (const auto& item : manifest.at("argv")) {
    argv.push_back(item.get<std::string>());
  }
  if (argv.empty() || argv.front() == "rerun") {
    throw dynamo::DataError("manifest argv is empty or recursive");
  }
  return run(argv);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Time-varying causal graph learning from a single "
               "non-stationary multivariate time series"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd =
      app.add_subcommand("simulate", "Generate a synthetic process");
  simulate_cmd->add_option("--d", sim.spec.d, "variable count")->required();
  simulate_cmd->add_option("--T", sim.spec.T, "series length")->required();
  simulate_cmd->add_option("--lag", sim.spec.L, "lag order");
  simulate_cmd->add_option("--mode", sim.mode, "linear|nonlinear");
  simulate_cmd->add_option("--noise", sim.noise, "gaussian|uniform");
  simulate_cmd->add_option("--seed", sim.spec.seed, "RNG seed");
  simulate_cmd->add_option("--gamma", sim.spec.gamma, "sparsity threshold");
  simulate_cmd->add_option("--phi-scale", sim.spec.phi_scale,
                           "changing-speed scale as a fraction of T");
  simulate_cmd->add_option("--out", sim.out, "output series CSV")->required();
  simulate_cmd->add_option("--truth", sim.truth, "output truth JSON");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit graphs at chosen times");
  fit_cmd->add_option("--input", fit.input, "input series CSV")->required();
  fit_cmd->add_flag("--no-header", fit.no_header, "input has no header row");
  fit_cmd->add_option("--t", fit.times_text, "times: list or start:stop:step")
      ->required();
  fit_cmd->add_option("--lag", fit.lag, "lag order");
  fit_cmd->add_option("--model", fit.model, "linear|nonlinear");
  fit_cmd->add_option("--kernel", fit.kernel,
                      "epanechnikov|gaussian|boxcar");
  fit_cmd->add_option("--bandwidth", fit.bandwidth, "kernel bandwidth");
  fit_cmd->add_option("--lambda1", fit.lambda1, "instantaneous sparsity");
  fit_cmd->add_option("--lambda2", fit.lambda2, "lagged sparsity");
  fit_cmd->add_option("--eta-tol", fit.eta_tol, "acyclicity tolerance");
  fit_cmd->add_option("--threshold", fit.threshold, "edge threshold");
  fit_cmd->add_option("--hidden-units", fit.hidden_units,
                      "hidden units per target (nonlinear)");
  fit_cmd->add_option("--max-outer", fit.max_outer,
                      "cap on augmented-Lagrangian iterations");
  fit_cmd->add_option("--seed", fit.seed, "init seed (nonlinear)");
  fit_cmd->add_option("--jobs", fit.jobs, "parallel fits");
  fit_cmd->add_flag("--strict", fit.strict,
                    "exit 3 when any fit fails to converge");
  fit_cmd->add_option("--out", fit.out, "output fits JSON")->required();

  CvArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "Cross-validate the bandwidth");
  cv_cmd->add_option("--input", cv.input, "input series CSV")->required();
  cv_cmd->add_flag("--no-header", cv.no_header, "input has no header row");
  cv_cmd->add_option("--t", cv.times_text, "times: list or start:stop:step")
      ->required();
  cv_cmd->add_option("--lag", cv.lag, "lag order");
  cv_cmd->add_option("--model", cv.model, "linear|nonlinear");
  cv_cmd->add_option("--kernel", cv.kernel, "kernel family");
  cv_cmd->add_option("--grid", cv.grid_text, "bandwidth grid");
  cv_cmd->add_option("--folds", cv.folds, "fold count");
  cv_cmd->add_option("--seed", cv.seed, "fold partition seed");
  cv_cmd->add_option("--lambda1", cv.lambda1, "instantaneous sparsity");
  cv_cmd->add_option("--lambda2", cv.lambda2, "lagged sparsity");
  cv_cmd->add_option("--eta-tol", cv.eta_tol, "acyclicity tolerance");
  cv_cmd->add_option("--hidden-units", cv.hidden_units,
                     "hidden units (nonlinear)");
  cv_cmd->add_option("--out", cv.out, "output JSON")->required();

  EvalArgs eval;
  auto* eval_cmd =
      app.add_subcommand("eval", "Score fits against truth graphs");
  eval_cmd->add_option("--est", eval.est, "fits JSON")->required();
  eval_cmd->add_option("--truth", eval.truth, "truth JSON")->required();
  eval_cmd->add_option("--threshold", eval.threshold, "edge threshold");
  eval_cmd->add_option("--out", eval.out, "output report JSON")->required();

  PredictArgs predict;
  auto* predict_cmd =
      app.add_subcommand("predict", "One-step prediction error of fits");
  predict_cmd->add_option("--fits", predict.fits, "fits JSON")->required();
  predict_cmd->add_option("--input", predict.input, "input series CSV")
      ->required();
  predict_cmd->add_flag("--no-header", predict.no_header,
                        "input has no header row");
  predict_cmd->add_option("--target", predict.target, "target variable name")
      ->required();
  predict_cmd->add_option("--out", predict.out, "output JSON")->required();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand(
      "ingest", "Build a home-away difference series from event data");
  ingest_cmd->add_option("--events", ingest.events, "event CSV")->required();
  ingest_cmd->add_option("--team", ingest.team, "team identifier")->required();
  ingest_cmd->add_flag("--strict-missing", ingest.strict_missing,
                       "error on missing minutes instead of imputing 0");
  ingest_cmd->add_flag("--bin-added-time", ingest.bin_added_time,
                       "clamp minutes past 90 into minute 90");
  ingest_cmd->add_option("--out", ingest.out, "output series CSV")->required();

  BenchmarkArgs bench;
  auto* bench_cmd = app.add_subcommand(
      "benchmark", "Replicated recovery benchmark on simulated data");
  bench_cmd->add_option("--d", bench.d_text, "variable counts, e.g. 5,10");
  bench_cmd->add_option("--T", bench.T, "series length");
  bench_cmd->add_option("--t", bench.times_text, "analysis times");
  bench_cmd->add_option("--seeds", bench.seeds, "replications");
  bench_cmd->add_option("--base-seed", bench.base_seed, "seed of seeds");
  bench_cmd->add_option("--mode", bench.mode, "linear|nonlinear");
  bench_cmd->add_option("--noise", bench.noise, "gaussian|uniform");
  bench_cmd->add_option("--lag", bench.lag, "lag order");
  bench_cmd->add_option("--gamma", bench.gamma, "sparsity threshold");
  bench_cmd->add_option("--phi-scale", bench.phi_scale, "changing speed");
  bench_cmd->add_option("--threshold", bench.threshold, "edge threshold");
  bench_cmd->add_option("--models", bench.models_text,
                        "subset of linear,nonlinear,baseline");
  bench_cmd->add_option("--grid", bench.grid_text, "CV bandwidth grid");
  bench_cmd->add_option("--folds", bench.folds, "CV folds");
  bench_cmd->add_option("--nonlinear-bandwidth", bench.nonlinear_bandwidth,
                        "fixed bandwidth for the nonlinear model");
  bench_cmd->add_option("--eta-tol", bench.eta_tol, "acyclicity tolerance");
  bench_cmd->add_option("--jobs", bench.jobs, "parallel seeds");
  bench_cmd->add_option("--out", bench.out, "output CSV")->required();

  std::string manifest_path;
  auto* rerun_cmd =
      app.add_subcommand("rerun", "Re-execute a run from its manifest");
  rerun_cmd->add_option("--manifest", manifest_path, "manifest JSON")
      ->required();

  std::vector<const char*> argv_c;
  argv_c.push_back("dynamo");
  for (const auto& s : args) argv_c.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv_c.size()),
              const_cast<char**>(argv_c.data()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  fit.lambda1_given = fit_cmd->count("--lambda1") > 0;
  fit.lambda2_given = fit_cmd->count("--lambda2") > 0;
  fit.eta_tol_given = fit_cmd->count("--eta-tol") > 0;

  try {
    if (simulate_cmd->parsed()) return run_simulate(sim, args);
    if (fit_cmd->parsed()) return run_fit(fit, args);
    if (cv_cmd->parsed()) return run_cv(cv, args);
    if (eval_cmd->parsed()) return run_eval(eval, args);
    if (predict_cmd->parsed()) return run_predict(predict, args);
    if (ingest_cmd->parsed()) return run_ingest(ingest, args);
    if (bench_cmd->parsed()) return run_benchmark_cmd(bench, args);
    if (rerun_cmd->parsed()) return run_rerun(manifest_path);
  } catch (const dynamo::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}
