#include <catch2/catch_amalgamated.hpp>

#include <cstdio>

#include "dynamo/serialize.hpp"
#include "dynamo/simulate.hpp"

using namespace dynamo;

TEST_CASE("linear fits round-trip through JSON") {
  std::vector<FitResult> fits(2);
  fits[0].t = 10;
  fits[0].bandwidth = 0.4;
  fits[0].params.W = Eigen::MatrixXd::Random(3, 3);
  fits[0].params.W.diagonal().setZero();
  fits[0].params.A = Eigen::MatrixXd::Random(3, 3);
  fits[0].loss = 1.25;
  fits[0].eta = 1e-9;
  fits[0].converged = true;
  fits[1] = fits[0];
  fits[1].t = 20;

  const Json j = fits_to_json(fits, 1, KernelFamily::Epanechnikov, 0.05,
                              {"a", "b", "c"});
  const std::string path = "fits_test.json";
  write_json_file(j, path);
  const LoadedFits loaded = load_fits(path);
  CHECK(loaded.model == "linear");
  CHECK(loaded.lag == 1);
  CHECK(loaded.threshold == 0.05);
  REQUIRE(loaded.fits.size() == 2);
  CHECK(loaded.fits[0].t == 10);
  CHECK(loaded.fits[0].W.isApprox(fits[0].params.W, 1e-12));
  CHECK(loaded.fits[0].A.isApprox(fits[0].params.A, 1e-12));
  CHECK(loaded.fits[1].t == 20);
  CHECK(loaded.fits[0].converged);
  std::remove(path.c_str());
}

TEST_CASE("nonlinear fits keep their networks") {
  NonlinearConfig cfg;
  cfg.hidden_units = 2;
  cfg.seed = 3;
  NonlinearFitResult fit;
  fit.t = 5;
  fit.bandwidth = 0.5;
  fit.networks = make_networks(3, 3, cfg);
  auto [W, A] = derived_adjacency(fit.networks);
  fit.W_derived = W;
  fit.A_derived = A;
  fit.target_losses = Eigen::VectorXd::Constant(3, 0.1);
  fit.converged = true;

  const Json j = fits_to_json(std::vector<NonlinearFitResult>{fit}, 1,
                              KernelFamily::Epanechnikov, 0.05,
                              {"a", "b", "c"});
  const std::string path = "fits_nl_test.json";
  write_json_file(j, path);
  const LoadedFits loaded = load_fits(path);
  CHECK(loaded.model == "nonlinear");
  REQUIRE(loaded.fits.size() == 1);
  REQUIRE(loaded.fits[0].networks.size() == 3);
  const auto& net = loaded.fits[0].networks[1];
  CHECK(net.target == 1);
  CHECK(net.first_layer.isApprox(fit.networks[1].first_layer, 1e-12));
  CHECK(net.output_bias == fit.networks[1].output_bias);
  std::remove(path.c_str());
}

TEST_CASE("truth files round-trip") {
  SimulationSpec spec;
  spec.d = 3;
  spec.T = 12;
  spec.seed = 2;
  const SimulatedData data = simulate(spec);
  const std::string path = "truth_test.json";
  write_json_file(truth_to_json(data), path);
  const LoadedTruth truth = load_truth(path);
  CHECK(truth.d == 3);
  CHECK(truth.T == 12);
  CHECK(truth.lag == 1);
  REQUIRE(truth.W.size() == 12);
  CHECK(truth.W[5].isApprox(data.true_W[5], 1e-12));
  CHECK(truth.A[7].isApprox(data.true_A[7], 1e-12));
  std::remove(path.c_str());
}

TEST_CASE("manifest lands next to the output") {
  write_manifest("out_test.json", "fit", {"fit", "--input", "x.csv"},
                 Json{{"lag", 1}}, {"x.csv"}, {"out_test.json"});
  const Json manifest = read_json_file("out_test.json.manifest.json");
  CHECK(manifest.at("subcommand") == "fit");
  CHECK(manifest.at("argv").size() == 3);
  CHECK(manifest.at("config").at("lag") == 1);
  CHECK(manifest.contains("version"));
  std::remove("out_test.json.manifest.json");
}

TEST_CASE("malformed JSON input raises a data error") {
  const std::string path = "broken_test.json";
  {
    std::ofstream out(path);
    out << "{not json";
  }
  CHECK_THROWS_AS(read_json_file(path), DataError);
  CHECK_THROWS_AS(load_fits(path), DataError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_json_file("missing_file.json"), DataError);
}
