#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "mzlab/rng.hpp"
#include "mzlab/tensor.hpp"

namespace mzlab {

struct DenseLayerParams {
  Tensor2 weights;  // out x in
  Vector biases;    // out

  std::size_t in() const { return weights.cols; }
  std::size_t out() const { return weights.rows; }

  bool operator==(const DenseLayerParams&) const = default;
};

// Two hidden ELU layers followed by one linear head per output group.
struct MlpParams {
  DenseLayerParams layer1;
  DenseLayerParams layer2;
  std::vector<DenseLayerParams> heads;

  bool empty() const { return layer1.weights.empty(); }
  std::size_t input_size() const { return layer1.in(); }
  std::size_t hidden_size() const { return layer1.out(); }

  bool operator==(const MlpParams&) const = default;
};

struct MlpDims {
  std::size_t input = 0;
  std::size_t hidden = 32;
  std::vector<std::size_t> heads;
};

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// Glorot-uniform weights, zero biases. Deterministic for a given rng state.
MlpParams init_params(Rng& rng, const MlpDims& dims);
DenseLayerParams init_dense(Rng& rng, std::size_t in, std::size_t out);

// Zero-filled parameters with the same shapes; used as gradient accumulators.
DenseLayerParams zeros_like(const DenseLayerParams& p);
MlpParams zeros_like(const MlpParams& p);

// Parameter visitation, in a fixed order. Overloaded for larger aggregates elsewhere.
template <typename F>
void for_each_span(DenseLayerParams& p, F&& f) {
  f(std::span<double>(p.weights.values));
  f(std::span<double>(p.biases));
}
template <typename F>
void for_each_span(const DenseLayerParams& p, F&& f) {
  f(std::span<const double>(p.weights.values));
  f(std::span<const double>(p.biases));
}
template <typename P, typename F>
  requires std::is_same_v<std::remove_const_t<P>, MlpParams>
void for_each_span(P& p, F&& f) {
  for_each_span(p.layer1, f);
  for_each_span(p.layer2, f);
  for (auto& h : p.heads) for_each_span(h, f);
}

template <typename P>
std::size_t parameter_count(const P& p) {
  std::size_t n = 0;
  for_each_span(p, [&](std::span<const double> s) { n += s.size(); });
  return n;
}

template <typename P>
Vector flatten(const P& p) {
  Vector out;
  out.reserve(parameter_count(p));
  for_each_span(p, [&](std::span<const double> s) { out.insert(out.end(), s.begin(), s.end()); });
  return out;
}

template <typename P>
void unflatten(std::span<const double> flat, P& p) {
  if (flat.size() != parameter_count(p)) throw ShapeError("unflatten: parameter count mismatch");
  std::size_t offset = 0;
  for_each_span(p, [&](std::span<double> s) {
    for (double& x : s) x = flat[offset++];
  });
}

template <typename P>
double squared_norm(const P& p) {
  double acc = 0.0;
  for_each_span(p, [&](std::span<const double> s) {
    for (double x : s) acc += x * x;
  });
  return acc;
}

struct AdamConfig {
  double learning_rate = 2e-2;
  double l2 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Vector m;
  Vector v;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

AdamState make_adam_state(std::size_t parameter_count);

// One Adam update with coupled L2 (l2 * param is added to the gradient before the moment update).
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config);

}  // namespace mzlab
