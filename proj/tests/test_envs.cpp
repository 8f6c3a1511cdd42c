#include <cmath>
#include <random>

#include "doctest.h"
#include "mzlab/envs.hpp"
#include "reference_envs.hpp"

using namespace mzlab;
using doctest::Approx;

TEST_CASE("environment specs") {
  const EnvSpec cp = env_spec(EnvKind::cartpole);
  CHECK(cp.action_count == 2);
  CHECK(cp.obs_dim == 4);
  CHECK(cp.max_steps == 500);
  const EnvSpec mc = env_spec(EnvKind::mountaincar);
  CHECK(mc.action_count == 3);
  CHECK(mc.obs_dim == 2);
  CHECK(mc.max_steps == 200);
  CHECK(env_kind_from_string("mountaincar") == EnvKind::mountaincar);
  CHECK_THROWS(env_kind_from_string("acrobot"));
}

TEST_CASE("cartpole reset range, determinism and mean") {
  Rng a(9), b(9);
  CHECK(cartpole_reset(a) == cartpole_reset(b));
  Rng rng(1);
  const int n = 10000;
  double sum[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const Observation o = cartpole_reset(rng);
    for (int c = 0; c < 4; ++c) {
      CHECK(std::abs(o[c]) <= 0.05);
      sum[c] += o[c];
    }
  }
  // Uniform(-0.05, 0.05): sigma = 0.1 / sqrt(12).
  const double sigma_mean = 0.1 / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  for (double s : sum) CHECK(std::abs(s / n) < 3.0 * sigma_mean);
}

TEST_CASE("cartpole step contracts") {
  const StepResult r = cartpole_step({0, 0, 0, 0}, 0);
  CHECK(r.reward == 1.0);
  CHECK_FALSE(r.terminal);
  CHECK_FALSE(r.truncated);

  // x = 2.39 moving right at 10 m/s crosses 2.4 in one step.
  CHECK(cartpole_step({2.39, 10.0, 0, 0}, 1).terminal);
  CHECK(cartpole_is_terminal({2.5, 0, 0, 0}));
  CHECK_THROWS_AS(cartpole_step({2.5, 0, 0, 0}, 0), EnvError);
  CHECK_THROWS_AS(cartpole_step({0, 0, 0, 0}, 2), EnvError);

  reference::CartPole ref;
  ref.state = {0, 0, 0, 0};
  ref.step(1);
  const StepResult s = cartpole_step({0, 0, 0, 0}, 1);
  for (int c = 0; c < 4; ++c) CHECK(std::abs(s.observation[c] - ref.state[c]) <= 1e-12);
  // From rest only the velocities change: x_acc = 0.1 * 10 / 1.1 * ... hand value.
  CHECK(s.observation[0] == 0.0);
  CHECK(s.observation[2] == 0.0);
  CHECK(s.observation[1] == Approx(0.02 * (10.0 / 1.1 - 0.05 * (-10.0 / 1.1) /
                                            (0.5 * (4.0 / 3.0 - 0.1 / 1.1)) / 1.1))
                                .epsilon(1e-12));
}

TEST_CASE("mountaincar reset and step contracts") {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Observation o = mountaincar_reset(rng);
    CHECK(o[1] == 0.0);
    CHECK(o[0] >= -0.6);
    CHECK(o[0] <= -0.4);
  }
  Rng a(2), b(2);
  CHECK(mountaincar_reset(a) == mountaincar_reset(b));

  const StepResult r = mountaincar_step({-0.5, 0.0}, 2);
  CHECK(r.observation[1] == Approx(0.001 - 0.0025 * std::cos(-1.5)).epsilon(1e-15));
  CHECK(r.observation[1] == Approx(0.000823).epsilon(1e-3));
  CHECK(r.reward == -1.0);

  const StepResult goal = mountaincar_step({0.49, 0.07}, 2);
  CHECK(goal.terminal);
  CHECK(goal.reward == -1.0);
  CHECK_THROWS_AS(mountaincar_step({0.55, 0.0}, 1), EnvError);
  CHECK_THROWS_AS(mountaincar_step({0.0, 0.0}, 3), EnvError);

  // Left wall: position clipped and velocity zeroed.
  const StepResult wall = mountaincar_step({-1.19, -0.07}, 0);
  CHECK(wall.observation[0] == -1.2);
  CHECK(wall.observation[1] == 0.0);
}

TEST_CASE("mountaincar state bounds along random rollouts") {
  Rng rng(6);
  Environment env(EnvKind::mountaincar);
  std::uniform_int_distribution<int> act(0, 2);
  for (int episode = 0; episode < 50; ++episode) {
    env.reset(rng);
    double ret = 0.0;
    while (!env.done()) {
      const StepResult r = env.step(act(rng));
      ret += r.reward;
      CHECK(r.observation[0] >= -1.2);
      CHECK(r.observation[0] <= 0.6);
      CHECK(std::abs(r.observation[1]) <= 0.07);
    }
    CHECK(env.steps() <= 200);
    CHECK(ret <= -1.0);
    CHECK(ret >= -200.0);
  }
}

TEST_CASE("Environment truncation and misuse") {
  Environment env(EnvKind::cartpole, 5);
  Rng rng(0);
  env.reset(rng);
  StepResult r;
  int steps = 0;
  while (!env.done()) {
    r = env.step(steps % 2);
    ++steps;
  }
  CHECK(steps == 5);
  CHECK(r.truncated);
  CHECK_FALSE(r.terminal);
  CHECK_THROWS_AS(env.step(0), EnvError);

  Environment fresh(EnvKind::mountaincar);
  CHECK_THROWS_AS(fresh.step(0), EnvError);
}

TEST_CASE("random-policy rollouts match the reference dynamics") {
  Rng rng(123);
  std::uniform_int_distribution<int> coin(0, 1), three(0, 2);

  SUBCASE("cartpole") {
    Observation s = cartpole_reset(rng);
    reference::CartPole ref;
    ref.state = {s[0], s[1], s[2], s[3]};
    for (int i = 0; i < 100000; ++i) {
      const int a = coin(rng);
      const StepResult r = cartpole_step(s, a);
      const bool ref_done = ref.step(a);
      for (int c = 0; c < 4; ++c) REQUIRE(std::abs(r.observation[c] - ref.state[c]) <= 1e-12);
      REQUIRE(r.terminal == ref_done);
      s = r.observation;
      if (r.terminal) {
        s = cartpole_reset(rng);
        ref.state = {s[0], s[1], s[2], s[3]};
      }
    }
  }
  SUBCASE("mountaincar") {
    Observation s = mountaincar_reset(rng);
    reference::MountainCar ref;
    ref.state = {s[0], s[1]};
    for (int i = 0; i < 100000; ++i) {
      const int a = three(rng);
      const StepResult r = mountaincar_step(s, a);
      const bool ref_done = ref.step(a);
      for (int c = 0; c < 2; ++c) REQUIRE(std::abs(r.observation[c] - ref.state[c]) <= 1e-12);
      REQUIRE(r.terminal == ref_done);
      s = r.observation;
      if (r.terminal || i % 200 == 199) {
        s = mountaincar_reset(rng);
        ref.state = {s[0], s[1]};
      }
    }
  }
}
