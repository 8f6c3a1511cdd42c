#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mzlab/envs.hpp"
#include "mzlab/nn.hpp"
#include "mzlab/tape.hpp"

namespace mzlab {

// ---------------------------------------------------------------------------
// Categorical support codec

// Probability mass over fixed, strictly increasing anchors.
struct SupportDistribution {
  Vector probabilities;
  Vector anchors;
};

Vector linear_anchors(double lo, double hi, std::size_t count);

// Clips x into the anchor range and splits its mass between the two bracketing
// anchors so that the expectation reproduces x.
SupportDistribution scalar_to_support(double x, const Vector& anchors);
// Same projection written into an existing row (hot path of target construction).
void scalar_to_support(double x, const Vector& anchors, std::span<double> out);
double support_to_scalar(const SupportDistribution& d);
double expected_value(std::span<const double> logits, const Vector& anchors);

// ---------------------------------------------------------------------------
// Networks

struct ModelDims {
  std::size_t obs_dim = 0;
  std::size_t action_count = 0;
  std::size_t latent_size = 8;
  std::size_t hidden_size = 32;
  Vector value_anchors;
  Vector reward_anchors;
  bool with_decoder = false;
  // f only, fed raw observations; h and g stay empty.
  bool alphazero = false;

  bool operator==(const ModelDims&) const = default;
};

// Default anchor ranges per environment: value and reward supports of `support_size` points.
ModelDims default_dims(EnvKind env, std::size_t latent_size, std::size_t support_size);

struct MuZeroParams {
  ModelDims dims;
  MlpParams h;  // obs -> latent
  MlpParams g;  // latent ++ one_hot(action) -> [latent, reward logits]
  MlpParams f;  // latent -> [policy logits, value logits]
  std::optional<MlpParams> decoder;  // latent -> obs

  bool operator==(const MuZeroParams&) const = default;
};

MuZeroParams init_muzero(Rng& rng, const ModelDims& dims);
MuZeroParams zeros_like(const MuZeroParams& p);

template <typename P, typename F>
  requires std::is_same_v<std::remove_const_t<P>, MuZeroParams>
void for_each_span(P& p, F&& f) {
  for_each_span(p.h, f);
  for_each_span(p.g, f);
  for_each_span(p.f, f);
  if (p.decoder) for_each_span(*p.decoder, f);
}

using LatentState = Vector;

Vector one_hot(std::size_t index, std::size_t count);

// Tape-level network applications over a batch (one row per sample). `grads`
// may be null for inference; otherwise it must mirror `params`.
VarId represent(const MuZeroParams& params, VarId observations, GradTape& tape,
                MuZeroParams* grads);

struct DynamicsVars {
  VarId reward_logits;
  VarId next_latent;
};
DynamicsVars dynamics(const MuZeroParams& params, VarId latent, VarId action_one_hot,
                      GradTape& tape, MuZeroParams* grads);

struct PredictionVars {
  VarId policy_logits;
  VarId value_logits;
};
PredictionVars predict(const MuZeroParams& params, VarId latent, GradTape& tape,
                       MuZeroParams* grads);
VarId decode(const MuZeroParams& params, VarId latent, GradTape& tape, MuZeroParams* grads);
// f applied directly to observations.
PredictionVars alphazero_predict(const MuZeroParams& params, VarId observations, GradTape& tape,
                                 MuZeroParams* grads);

struct UnrollVars {
  std::vector<VarId> latents;        // k = 0..K
  std::vector<VarId> policy_logits;  // k = 0..K
  std::vector<VarId> value_logits;   // k = 0..K
  std::vector<VarId> reward_logits;  // k = 1..K
  std::vector<VarId> decoded;        // k = 0..K, only with a decoder
};

struct UnrollOptions {
  // Gradient factor applied to each latent before it re-enters g.
  double dynamics_gradient_scale = 1.0;
  bool decode = true;
};

// s^0 = h(o); (r^k, s^k) = g(s^{k-1}, a_k); (p^k, v^k) = f(s^k).
// `actions[k]` holds the one-hot rows for step k + 1.
UnrollVars unroll(const MuZeroParams& params, VarId observations,
                  std::span<const Tensor2> action_one_hots, GradTape& tape, MuZeroParams* grads,
                  const UnrollOptions& options = {});

// ---------------------------------------------------------------------------
// Single-sample operations

LatentState represent(const MuZeroParams& params, const Observation& obs, GradTape& tape);
std::pair<SupportDistribution, LatentState> dynamics(const MuZeroParams& params,
                                                     const LatentState& latent, std::size_t action,
                                                     GradTape& tape);
std::pair<Vector, SupportDistribution> predict(const MuZeroParams& params,
                                               const LatentState& latent, GradTape& tape);
Observation decode(const MuZeroParams& params, const LatentState& latent, GradTape& tape);
std::pair<Vector, SupportDistribution> alphazero_predict(const MuZeroParams& params,
                                                         const Observation& obs, GradTape& tape);

struct UnrollOutput {
  std::vector<LatentState> latents;
  std::vector<Vector> policy_logits;
  std::vector<SupportDistribution> values;
  std::vector<SupportDistribution> rewards;
  std::vector<Observation> decoded;
};
UnrollOutput unroll(const MuZeroParams& params, const Observation& obs,
                    std::span<const std::size_t> actions, GradTape& tape);

// Scalar-valued inference used by search.
struct Inference {
  LatentState latent;
  Vector policy_logits;
  double value = 0.0;
  double reward = 0.0;
};
Inference initial_inference(const MuZeroParams& params, const Observation& obs);
Inference recurrent_inference(const MuZeroParams& params, const LatentState& latent,
                              std::size_t action);
Inference alphazero_inference(const MuZeroParams& params, const Observation& obs);

}  // namespace mzlab
