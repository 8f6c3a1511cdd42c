#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mzlab/gradcheck.hpp"
#include "mzlab/model.hpp"
#include "mzlab/training.hpp"

namespace mzlab {

// A small random loss instance for gradient verification.
struct LossCheckCase {
  EnvKind env = EnvKind::cartpole;
  std::size_t latent_size = 2;
  std::size_t unroll_steps = 1;
  std::size_t hidden_size = 8;
  std::size_t support_size = 5;
  std::size_t batch_size = 3;
  RegularizerMode mode = RegularizerMode::none;
  Discrepancy discrepancy = Discrepancy::mse;
  double omega = 1.0;
  double l2 = 1e-4;
  // Halving the dynamics-input gradient makes the analytic result a scaled
  // pseudo-gradient, so finite differences only agree with it switched off.
  bool halve_dynamics_gradient = false;
  std::uint64_t seed = 0;
};

// Cycles through every (mode, L in {2,4}, K in {1,3}) combination.
std::vector<LossCheckCase> loss_check_cases(std::size_t trials, std::uint64_t seed);

struct LossCheckInstance {
  MuZeroParams params;
  std::vector<TrainTarget> batch;
  LossConfig loss;
};

// Random weights and targets. Each row ends its episode at a random step, so
// absorbing masks are exercised too.
LossCheckInstance make_loss_check_instance(const LossCheckCase& c);

// Total loss (objective plus l2 * ||theta||^2) against central differences.
GradCheckReport check_loss_gradient(const LossCheckCase& c, double tolerance = 1e-5);

}  // namespace mzlab
