#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fclab/config.hpp"

using namespace fclab;

namespace {

std::string write_temp(const std::string& content) {
  static int counter = 0;
  const auto path = std::filesystem::temp_directory_path() /
                    ("fclab_cfg_" + std::to_string(counter++) + ".txt");
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("config parses a manual experiment") {
  const auto path = write_temp(
      "# squared-length study\n"
      "dim = 2\n"
      "theta_star = 1, 0\n"
      "sigma = identity\n"
      "hypothesis.variant = ball_complement\n"
      "hypothesis.center = 0, 0\n"
      "hypothesis.radius = 1\n"
      "n_reps = 500\n"
      "base_seed = 7\n"
      "alpha_grid = 0.2, 0.5\n");
  const auto cfg = ExperimentConfig::from_file(path);
  cfg.validate();
  CHECK(cfg.dim == 2);
  CHECK(cfg.n_reps == 500);
  CHECK(cfg.alpha_grid == std::vector<double>{0.2, 0.5});
  const auto setup = cfg.make_setup();
  CHECK(setup.experiment.dim() == 2);
  CHECK(setup.hypothesis.is_false_at({1.0, 0.0}));
  std::remove(path.c_str());
}

TEST_CASE("config validation lists every violated field") {
  ExperimentConfig cfg;
  cfg.preset = "example9";
  cfg.n_reps = 5;
  cfg.alpha_grid = {1.5};
  cfg.format = "png";
  try {
    cfg.validate();
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(e.problems().size() == 4);
  }
}

TEST_CASE("preset and manual fields are mutually exclusive") {
  ExperimentConfig cfg;
  cfg.preset = "example1";
  cfg.dim = 2;
  cfg.theta_star = {1.0, 0.0};
  cfg.hypothesis_variant = "ball_complement";
  cfg.hyp_center = {0.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("unknown keys are rejected") {
  const auto path = write_temp("preset = example1\nbogus_key = 3\n");
  CHECK_THROWS_AS(ExperimentConfig::from_file(path), config_error);
  std::remove(path.c_str());
}

TEST_CASE("sigma shorthands") {
  ExperimentConfig cfg;
  cfg.dim = 2;
  cfg.theta_star = {0.0, 0.0};
  cfg.sigma_spec = "diag:4,1";
  cfg.hypothesis_variant = "halfspace";
  cfg.hyp_g = {1.0, 0.0};
  cfg.hyp_anchor = {0.0, 0.0};
  cfg.validate();
  CHECK(cfg.make_setup().experiment.sigma()(0, 0) == 4.0);

  cfg.sigma_spec = "2,0.5,0.5,1";
  cfg.validate();
  CHECK(cfg.make_setup().experiment.sigma()(0, 1) == 0.5);

  cfg.sigma_spec = "diag:1,0";  // semidefinite
  CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("superlevel quadratic hypothesis from config") {
  ExperimentConfig cfg;
  cfg.dim = 2;
  cfg.theta_star = {1.0, 0.0};
  cfg.hypothesis_variant = "superlevel_quadratic";
  cfg.hyp_a = {1.0, 0.0, 0.0, 1.0};
  cfg.hyp_b = {0.0, 0.0};
  cfg.hyp_anchor = {1.0, 0.0};
  cfg.validate();
  const auto h = cfg.make_hypothesis();
  CHECK(h.contains({2.0, 0.0}));       // ||theta||^2 = 4 > 1
  CHECK_FALSE(h.contains({0.5, 0.0}));
  CHECK(h.is_false_at({1.0, 0.0}));
}

TEST_CASE("flat-map echo round-trips") {
  ExperimentConfig cfg;
  cfg.preset = "example1";
  cfg.n_reps = 321;
  cfg.base_seed = 99;
  cfg.include_valid_im = false;
  cfg.n_threads = 3;
  const auto flat = cfg.to_flat_map();
  const auto echoed = ExperimentConfig::from_map({flat.begin(), flat.end()});
  CHECK(echoed.preset == cfg.preset);
  CHECK(echoed.n_reps == 321);
  CHECK(echoed.base_seed == 99);
  CHECK_FALSE(echoed.include_valid_im);
  CHECK(echoed.n_threads == 3);
  CHECK(echoed.to_flat_map() == cfg.to_flat_map());
}
