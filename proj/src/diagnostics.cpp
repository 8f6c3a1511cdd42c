#include "mzlab/diagnostics.hpp"

#include <random>

namespace mzlab {

std::vector<LossCheckCase> loss_check_cases(std::size_t trials, std::uint64_t seed) {
  constexpr RegularizerMode kModes[] = {RegularizerMode::none, RegularizerMode::contrastive,
                                        RegularizerMode::decoder};
  std::vector<LossCheckCase> out;
  for (std::size_t i = 0; i < trials; ++i) {
    LossCheckCase c;
    c.mode = kModes[i % 3];
    c.latent_size = (i / 3) % 2 == 0 ? 2 : 4;
    c.unroll_steps = (i / 6) % 2 == 0 ? 1 : 3;
    c.env = (i / 12) % 2 == 0 ? EnvKind::cartpole : EnvKind::mountaincar;
    c.discrepancy = (i / 2) % 2 == 0 ? Discrepancy::mse : Discrepancy::cosine;
    c.seed = seed * 1000003ULL + i;
    out.push_back(c);
  }
  return out;
}

LossCheckInstance make_loss_check_instance(const LossCheckCase& c) {
  Rng rng = derive_rng({c.seed, 0x67726164ULL});
  ModelDims dims = default_dims(c.env, c.latent_size, c.support_size);
  dims.hidden_size = c.hidden_size;
  dims.with_decoder = c.mode == RegularizerMode::decoder;

  LossCheckInstance inst;
  inst.params = init_muzero(rng, dims);
  // Nonzero biases so no unit sits exactly at an ELU kink.
  for_each_span(inst.params, [&](std::span<double> s) {
    for (double& x : s) x += uniform(rng, -0.1, 0.1);
  });

  const std::size_t K = c.unroll_steps, A = dims.action_count;
  std::normal_distribution<double> normal(0.0, 0.5);
  auto random_obs = [&] {
    Observation o(dims.obs_dim);
    for (double& x : o) x = normal(rng);
    return o;
  };
  auto random_policy = [&] {
    Vector p(A);
    double sum = 0.0;
    for (double& x : p) sum += (x = uniform(rng, 0.05, 1.0));
    for (double& x : p) x /= sum;
    return p;
  };
  const Vector& va = dims.value_anchors;
  const Vector& ra = dims.reward_anchors;
  for (std::size_t b = 0; b < c.batch_size; ++b) {
    TrainTarget t;
    const std::size_t end = std::uniform_int_distribution<std::size_t>(1, K + 1)(rng);
    t.observation = random_obs();
    for (std::size_t k = 0; k <= K; ++k) {
      const bool absorbing = k >= end;
      t.absorbing.push_back(absorbing ? 1 : 0);
      t.values.push_back(absorbing ? 0.0 : uniform(rng, va.front(), va.back()));
      t.policies.push_back(absorbing ? Vector(A, 1.0 / static_cast<double>(A)) : random_policy());
      if (k > 0) {
        t.actions.push_back(std::uniform_int_distribution<std::size_t>(0, A - 1)(rng));
        t.rewards.push_back(k > end ? 0.0 : uniform(rng, ra.front(), ra.back()));
        t.future_observations.push_back(absorbing ? Observation(dims.obs_dim, 0.0) : random_obs());
      }
    }
    inst.batch.push_back(std::move(t));
  }

  inst.loss.mode = c.mode;
  inst.loss.omega = c.omega;
  inst.loss.discrepancy = c.discrepancy;
  inst.loss.l2 = c.l2;
  inst.loss.halve_dynamics_gradient = c.halve_dynamics_gradient;
  return inst;
}

GradCheckReport check_loss_gradient(const LossCheckCase& c, double tolerance) {
  const LossCheckInstance inst = make_loss_check_instance(c);
  MuZeroParams grads = zeros_like(inst.params);
  compute_loss(inst.params, inst.batch, inst.loss, &grads);
  const Vector theta = flatten(inst.params);
  Vector analytic = flatten(grads);
  for (std::size_t i = 0; i < analytic.size(); ++i) analytic[i] += 2.0 * c.l2 * theta[i];

  MuZeroParams probe = inst.params;
  auto loss = [&](std::span<const double> flat) {
    unflatten(flat, probe);
    // The contrastive branch is held at the unperturbed weights, as stop-gradient implies.
    return compute_loss(probe, inst.batch, inst.loss, nullptr, &inst.params).total;
  };
  return finite_diff_check(loss, theta, analytic, tolerance);
}

}  // namespace mzlab
