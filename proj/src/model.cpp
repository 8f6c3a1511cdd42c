#include "mzlab/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace mzlab {

Vector linear_anchors(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw std::invalid_argument("linear_anchors: need count >= 2 and hi > lo");
  Vector a(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) a[i] = lo + step * static_cast<double>(i);
  a.back() = hi;
  return a;
}

void scalar_to_support(double x, const Vector& anchors, std::span<double> out) {
  if (anchors.size() < 2) throw std::invalid_argument("scalar_to_support: need at least two anchors");
  if (out.size() != anchors.size()) throw ShapeError("scalar_to_support: output length mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  x = std::clamp(x, anchors.front(), anchors.back());
  // Lower bracketing anchor: last anchor <= x, capped so that i + 1 is valid.
  auto it = std::upper_bound(anchors.begin(), anchors.end(), x);
  std::size_t i = static_cast<std::size_t>(std::distance(anchors.begin(), it));
  i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, anchors.size() - 2);
  const double upper_weight = (x - anchors[i]) / (anchors[i + 1] - anchors[i]);
  out[i] = 1.0 - upper_weight;
  out[i + 1] = upper_weight;
}

SupportDistribution scalar_to_support(double x, const Vector& anchors) {
  SupportDistribution d{Vector(anchors.size()), anchors};
  scalar_to_support(x, anchors, d.probabilities);
  return d;
}

double support_to_scalar(const SupportDistribution& d) {
  if (d.probabilities.size() != d.anchors.size()) throw ShapeError("support_to_scalar: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < d.anchors.size(); ++i) acc += d.probabilities[i] * d.anchors[i];
  return acc;
}

double expected_value(std::span<const double> logits, const Vector& anchors) {
  return support_to_scalar({softmax(logits), anchors});
}

ModelDims default_dims(EnvKind env, std::size_t latent_size, std::size_t support_size) {
  const EnvSpec spec = env_spec(env);
  ModelDims d;
  d.obs_dim = spec.obs_dim;
  d.action_count = spec.action_count;
  d.latent_size = latent_size;
  if (env == EnvKind::cartpole) {
    d.value_anchors = linear_anchors(0.0, 350.0, support_size);
    d.reward_anchors = linear_anchors(0.0, 1.0, support_size);
  } else {
    d.value_anchors = linear_anchors(-200.0, 0.0, support_size);
    d.reward_anchors = linear_anchors(-1.0, 0.0, support_size);
  }
  return d;
}

MuZeroParams init_muzero(Rng& rng, const ModelDims& dims) {
  if (dims.obs_dim == 0 || dims.action_count == 0 || dims.latent_size == 0) {
    throw ShapeError("init_muzero: zero-sized dimension");
  }
  if (dims.value_anchors.size() < 2 || dims.reward_anchors.size() < 2) {
    throw ShapeError("init_muzero: supports need at least two anchors");
  }
  MuZeroParams p;
  p.dims = dims;
  const std::size_t hidden = dims.hidden_size;
  if (dims.alphazero) {
    p.f = init_params(rng, {dims.obs_dim, hidden, {dims.action_count, dims.value_anchors.size()}});
    return p;
  }
  p.h = init_params(rng, {dims.obs_dim, hidden, {dims.latent_size}});
  p.g = init_params(rng, {dims.latent_size + dims.action_count, hidden,
                          {dims.latent_size, dims.reward_anchors.size()}});
  p.f = init_params(rng, {dims.latent_size, hidden, {dims.action_count, dims.value_anchors.size()}});
  // Drawn last so h, g, f are identical with and without a decoder.
  if (dims.with_decoder) p.decoder = init_params(rng, {dims.latent_size, hidden, {dims.obs_dim}});
  return p;
}

MuZeroParams zeros_like(const MuZeroParams& p) {
  MuZeroParams z;
  z.dims = p.dims;
  if (!p.h.empty()) z.h = zeros_like(p.h);
  if (!p.g.empty()) z.g = zeros_like(p.g);
  z.f = zeros_like(p.f);
  if (p.decoder) z.decoder = zeros_like(*p.decoder);
  return z;
}

Vector one_hot(std::size_t index, std::size_t count) {
  if (index >= count) throw std::out_of_range("one_hot: index out of range");
  Vector v(count, 0.0);
  v[index] = 1.0;
  return v;
}

namespace {

VarId trunk(const MlpParams& mlp, VarId x, GradTape& tape, MlpParams* sink) {
  VarId h1 = tape.elu(tape.dense(x, mlp.layer1, sink ? &sink->layer1 : nullptr));
  return tape.elu(tape.dense(h1, mlp.layer2, sink ? &sink->layer2 : nullptr));
}

VarId head(const MlpParams& mlp, std::size_t i, VarId hidden, GradTape& tape, MlpParams* sink) {
  return tape.dense(hidden, mlp.heads[i], sink ? &sink->heads[i] : nullptr);
}

void require_muzero(const MuZeroParams& p) {
  if (p.dims.alphazero) throw std::logic_error("operation needs MuZero networks, got AlphaZero params");
}

}  // namespace

VarId represent(const MuZeroParams& params, VarId observations, GradTape& tape,
                MuZeroParams* grads) {
  require_muzero(params);
  MlpParams* sink = grads ? &grads->h : nullptr;
  VarId hidden = trunk(params.h, observations, tape, sink);
  return tape.minmax_normalize(head(params.h, 0, hidden, tape, sink));
}

DynamicsVars dynamics(const MuZeroParams& params, VarId latent, VarId action_one_hot,
                      GradTape& tape, MuZeroParams* grads) {
  require_muzero(params);
  MlpParams* sink = grads ? &grads->g : nullptr;
  VarId hidden = trunk(params.g, tape.concat_cols(latent, action_one_hot), tape, sink);
  DynamicsVars out{};
  out.next_latent = tape.minmax_normalize(head(params.g, 0, hidden, tape, sink));
  out.reward_logits = head(params.g, 1, hidden, tape, sink);
  return out;
}

PredictionVars predict(const MuZeroParams& params, VarId latent, GradTape& tape,
                       MuZeroParams* grads) {
  MlpParams* sink = grads ? &grads->f : nullptr;
  VarId hidden = trunk(params.f, latent, tape, sink);
  return {head(params.f, 0, hidden, tape, sink), head(params.f, 1, hidden, tape, sink)};
}

VarId decode(const MuZeroParams& params, VarId latent, GradTape& tape, MuZeroParams* grads) {
  if (!params.decoder) throw std::logic_error("decode: model has no decoder network");
  MlpParams* sink = grads && grads->decoder ? &*grads->decoder : nullptr;
  VarId hidden = trunk(*params.decoder, latent, tape, sink);
  return head(*params.decoder, 0, hidden, tape, sink);
}

PredictionVars alphazero_predict(const MuZeroParams& params, VarId observations, GradTape& tape,
                                 MuZeroParams* grads) {
  if (!params.dims.alphazero) throw std::logic_error("alphazero_predict: params are not AlphaZero");
  return predict(params, observations, tape, grads);
}

UnrollVars unroll(const MuZeroParams& params, VarId observations,
                  std::span<const Tensor2> action_one_hots, GradTape& tape, MuZeroParams* grads,
                  const UnrollOptions& options) {
  UnrollVars out;
  const bool with_decoder = options.decode && params.decoder.has_value();
  VarId latent = represent(params, observations, tape, grads);
  auto emit = [&](VarId s) {
    out.latents.push_back(s);
    const PredictionVars pv = predict(params, s, tape, grads);
    out.policy_logits.push_back(pv.policy_logits);
    out.value_logits.push_back(pv.value_logits);
    if (with_decoder) out.decoded.push_back(decode(params, s, tape, grads));
  };
  emit(latent);
  for (const Tensor2& actions : action_one_hots) {
    if (actions.cols != params.dims.action_count) throw ShapeError("unroll: one-hot width mismatch");
    VarId input = latent;
    if (options.dynamics_gradient_scale != 1.0) {
      input = tape.scale_gradient(latent, options.dynamics_gradient_scale);
    }
    const DynamicsVars dv = dynamics(params, input, tape.constant(actions), tape, grads);
    out.reward_logits.push_back(dv.reward_logits);
    latent = dv.next_latent;
    emit(latent);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void check_obs(const MuZeroParams& p, const Observation& obs) {
  if (obs.size() != p.dims.obs_dim) throw ShapeError("observation dimension mismatch");
}

SupportDistribution distribution_of(const Tensor2& logits, const Vector& anchors) {
  return {softmax(logits.values), anchors};
}

}  // namespace

LatentState represent(const MuZeroParams& params, const Observation& obs, GradTape& tape) {
  check_obs(params, obs);
  return tape.value(represent(params, tape.constant(Tensor2::row(obs)), tape, nullptr)).values;
}

std::pair<SupportDistribution, LatentState> dynamics(const MuZeroParams& params,
                                                     const LatentState& latent, std::size_t action,
                                                     GradTape& tape) {
  if (action >= params.dims.action_count) throw std::out_of_range("dynamics: invalid action index");
  if (latent.size() != params.dims.latent_size) throw ShapeError("dynamics: latent size mismatch");
  const DynamicsVars dv =
      dynamics(params, tape.constant(Tensor2::row(latent)),
               tape.constant(Tensor2::row(one_hot(action, params.dims.action_count))), tape, nullptr);
  return {distribution_of(tape.value(dv.reward_logits), params.dims.reward_anchors),
          tape.value(dv.next_latent).values};
}

std::pair<Vector, SupportDistribution> predict(const MuZeroParams& params,
                                               const LatentState& latent, GradTape& tape) {
  if (latent.size() != params.f.input_size()) throw ShapeError("predict: latent size mismatch");
  const PredictionVars pv = predict(params, tape.constant(Tensor2::row(latent)), tape, nullptr);
  return {tape.value(pv.policy_logits).values,
          distribution_of(tape.value(pv.value_logits), params.dims.value_anchors)};
}

Observation decode(const MuZeroParams& params, const LatentState& latent, GradTape& tape) {
  return tape.value(decode(params, tape.constant(Tensor2::row(latent)), tape, nullptr)).values;
}

std::pair<Vector, SupportDistribution> alphazero_predict(const MuZeroParams& params,
                                                         const Observation& obs, GradTape& tape) {
  check_obs(params, obs);
  const PredictionVars pv =
      alphazero_predict(params, tape.constant(Tensor2::row(obs)), tape, nullptr);
  return {tape.value(pv.policy_logits).values,
          distribution_of(tape.value(pv.value_logits), params.dims.value_anchors)};
}

UnrollOutput unroll(const MuZeroParams& params, const Observation& obs,
                    std::span<const std::size_t> actions, GradTape& tape) {
  check_obs(params, obs);
  std::vector<Tensor2> hots;
  for (std::size_t a : actions) hots.push_back(Tensor2::row(one_hot(a, params.dims.action_count)));
  const UnrollVars uv = unroll(params, tape.constant(Tensor2::row(obs)), hots, tape, nullptr);
  UnrollOutput out;
  for (std::size_t k = 0; k < uv.latents.size(); ++k) {
    out.latents.push_back(tape.value(uv.latents[k]).values);
    out.policy_logits.push_back(tape.value(uv.policy_logits[k]).values);
    out.values.push_back(distribution_of(tape.value(uv.value_logits[k]), params.dims.value_anchors));
  }
  for (VarId r : uv.reward_logits) {
    out.rewards.push_back(distribution_of(tape.value(r), params.dims.reward_anchors));
  }
  for (VarId d : uv.decoded) out.decoded.push_back(tape.value(d).values);
  return out;
}

Inference initial_inference(const MuZeroParams& params, const Observation& obs) {
  GradTape tape;
  Inference out;
  out.latent = represent(params, obs, tape);
  auto [logits, value] = predict(params, out.latent, tape);
  out.policy_logits = std::move(logits);
  out.value = support_to_scalar(value);
  return out;
}

Inference recurrent_inference(const MuZeroParams& params, const LatentState& latent,
                              std::size_t action) {
  GradTape tape;
  Inference out;
  auto [reward, next] = dynamics(params, latent, action, tape);
  out.reward = support_to_scalar(reward);
  out.latent = std::move(next);
  auto [logits, value] = predict(params, out.latent, tape);
  out.policy_logits = std::move(logits);
  out.value = support_to_scalar(value);
  return out;
}

Inference alphazero_inference(const MuZeroParams& params, const Observation& obs) {
  GradTape tape;
  Inference out;
  auto [logits, value] = alphazero_predict(params, obs, tape);
  out.policy_logits = std::move(logits);
  out.value = support_to_scalar(value);
  return out;
}

}  // namespace mzlab
