#include "mzlab/nn.hpp"

#include <cmath>

namespace mzlab {

DenseLayerParams init_dense(Rng& rng, std::size_t in, std::size_t out) {
  DenseLayerParams p;
  p.weights = Tensor2(out, in);
  p.biases.assign(out, 0.0);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& w : p.weights.values) w = dist(rng);
  return p;
}

MlpParams init_params(Rng& rng, const MlpDims& dims) {
  if (dims.input == 0 || dims.hidden == 0) throw ShapeError("init_params: zero-sized layer");
  MlpParams p;
  p.layer1 = init_dense(rng, dims.input, dims.hidden);
  p.layer2 = init_dense(rng, dims.hidden, dims.hidden);
  for (std::size_t out : dims.heads) p.heads.push_back(init_dense(rng, dims.hidden, out));
  return p;
}

DenseLayerParams zeros_like(const DenseLayerParams& p) {
  DenseLayerParams z;
  z.weights = Tensor2(p.weights.rows, p.weights.cols);
  z.biases.assign(p.biases.size(), 0.0);
  return z;
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams z;
  z.layer1 = zeros_like(p.layer1);
  z.layer2 = zeros_like(p.layer2);
  for (const auto& h : p.heads) z.heads.push_back(zeros_like(h));
  return z;
}

AdamState make_adam_state(std::size_t parameter_count) {
  return AdamState{Vector(parameter_count, 0.0), Vector(parameter_count, 0.0), 0};
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + config.l2 * params[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

}  // namespace mzlab
