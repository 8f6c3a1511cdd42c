#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mzlab/config.hpp"

using namespace mzlab;

namespace {

void check_shared_defaults(const ExperimentConfig& c) {
  CHECK(c.episodes == 20);
  CHECK(c.epochs == 40);
  CHECK(c.dirichlet_alpha == 0.25);
  CHECK(c.exploration_fraction == 0.25);
  CHECK(c.c1 == 1.25);
  CHECK(c.c2 == 19652.0);
  CHECK(c.temperature == 1.0);
  CHECK(c.simulations == 11);
  CHECK(c.window == 10);
  CHECK(c.discount == 0.997);
  CHECK(c.learning_rate == 2e-2);
  CHECK(c.batch_size == 128);
  CHECK(c.l2 == 1e-4);
  CHECK(c.hidden_size == 32);
}

}  // namespace

TEST_CASE("cartpole defaults") {
  const ExperimentConfig c = parse_config("env.name = cartpole\n");
  CHECK(c.env == EnvKind::cartpole);
  CHECK(c.td_steps == 10);
  CHECK(c.max_steps == 500);
  CHECK(c.support_size == 15);
  CHECK(c.self_play_iterations == 80);
  check_shared_defaults(c);
  CHECK(c == default_config(EnvKind::cartpole));
}

TEST_CASE("mountaincar defaults") {
  const ExperimentConfig c = parse_config("env.name = mountaincar\n");
  CHECK(c.env == EnvKind::mountaincar);
  CHECK(c.td_steps == 50);
  CHECK(c.max_steps == 200);
  CHECK(c.support_size == 20);
  CHECK(c.self_play_iterations == 1000);
  check_shared_defaults(c);
}

TEST_CASE("env.name selects the column wherever it appears") {
  const ExperimentConfig c = parse_config(
      "# comment\nreplay.td_steps = 7\n\nenv.name = mountaincar  # trailing\nalgorithm.name = muzero_decoder\n");
  CHECK(c.env == EnvKind::mountaincar);
  CHECK(c.td_steps == 7);
  CHECK(c.max_steps == 200);
  CHECK(c.algorithm == Algorithm::muzero_decoder);
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(parse_config("replay.discount = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("replay.discount = 0\n"), ConfigError);
  CHECK_NOTHROW(parse_config("replay.discount = 1\n"));
  CHECK_THROWS_AS(parse_config("model.latnet_size = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("latent_size = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.latent_size 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.latent_size = -4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.latent_size = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.latent_size = 4\nmodel.latent_size = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("algorithm.name = dqn\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("train.scale_unroll_loss = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("regularizer.omega = -1\n"), ConfigError);
  CHECK_THROWS(parse_config("env.name = pong\n"));
  try {
    parse_config("env.name = cartpole\n\nbogus.key = 1\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("overrides") {
  ExperimentConfig c = default_config(EnvKind::cartpole);
  apply_overrides(c, {{"model.latent_size", "4"}, {"run.seed", "9"}});
  CHECK(c.latent_size == 4);
  CHECK(c.seed == 9);
  CHECK_THROWS_AS(apply_overrides(c, {{"run.sed", "1"}}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(c, {{"replay.discount", "2"}}), ConfigError);
}

TEST_CASE("config text round trip") {
  ExperimentConfig c = default_config(EnvKind::mountaincar);
  c.algorithm = Algorithm::muzero_contrastive;
  c.omega = 0.1 + 0.2;
  c.learning_rate = 1.0 / 3.0;
  c.discrepancy = Discrepancy::cosine;
  c.halve_dynamics_gradient = false;
  c.output_dir = "runs/some dir";
  c.seed = 123456789012345ULL;
  CHECK(parse_config(to_config_text(c)) == c);
  CHECK(parse_config(to_config_text(default_config(EnvKind::cartpole))) ==
        default_config(EnvKind::cartpole));
}

TEST_CASE("config files") {
  const auto path = std::filesystem::temp_directory_path() / "mzlab_config_test.cfg";
  {
    std::ofstream f(path);
    f << "env.name = cartpole\nrun.seed = 4\n";
  }
  CHECK(load_config(path).seed == 4);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), ConfigError);
}
