#pragma once

#include <cstddef>
#include <vector>

#include "mzlab/nn.hpp"
#include "mzlab/tensor.hpp"

namespace mzlab {

// Handle to a value recorded on a GradTape.
struct VarId {
  std::size_t index;
};

// Reverse-mode tape over batched row-major tensors. Every row of a tensor is
// one sample; losses reduce over rows with caller-provided row weights.
//
// Parameters are not tape leaves. A dense op reads its layer by reference and
// accumulates into an optional sink of the same shape during backward, so a
// gradient structure mirrors the parameter structure exactly.
class GradTape {
 public:
  VarId constant(Tensor2 value);
  VarId variable(Tensor2 value);

  VarId dense(VarId x, const DenseLayerParams& layer, DenseLayerParams* grad_sink);
  VarId elu(VarId x);
  VarId concat_cols(VarId a, VarId b);
  // Per-row (v - min) / (max - min + eps). Backward differentiates through min and max.
  VarId minmax_normalize(VarId x);
  // Identity forward; blocks every gradient through this edge.
  VarId stop_gradient(VarId x);
  // Identity forward; multiplies the incoming gradient by `factor`.
  VarId scale_gradient(VarId x, double factor);

  VarId add(VarId a, VarId b);
  VarId scale(VarId a, double factor);
  VarId mul(VarId a, VarId b);
  VarId sum(VarId a);

  // Sum over rows of weight_r * (-sum_c target_rc * log softmax(logits_r)_c). 1x1 result.
  VarId softmax_cross_entropy(VarId logits, const Tensor2& target, const Vector& row_weights);
  // Sum over rows of weight_r * ||a_r - b_r||^2 / cols. 1x1 result.
  VarId squared_error(VarId a, VarId b, const Vector& row_weights);
  // Sum over rows of weight_r * (1 - cos(a_r, b_r)). 1x1 result.
  VarId cosine_distance(VarId a, VarId b, const Vector& row_weights);

  const Tensor2& value(VarId v) const { return nodes_[v.index].value; }
  double scalar(VarId v) const { return nodes_[v.index].value.values.at(0); }
  // Gradient of the last backward() root w.r.t. v; zeros if none reached it.
  Tensor2 grad(VarId v) const;

  // Seeds d(root)/d(root) = 1 for every entry and propagates to every reachable
  // variable and parameter sink.
  void backward(VarId root);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  enum class Op {
    leaf,
    dense,
    elu,
    concat,
    minmax,
    stop_gradient,
    scale_gradient,
    add,
    scale,
    mul,
    sum,
    softmax_xent,
    squared_error,
    cosine,
  };

  struct Node {
    Op op = Op::leaf;
    std::size_t a = 0;
    std::size_t b = 0;
    Tensor2 value;
    Tensor2 grad;
    bool requires_grad = false;
    bool has_grad = false;
    const DenseLayerParams* layer = nullptr;
    DenseLayerParams* sink = nullptr;
    double factor = 1.0;
    Tensor2 aux;   // softmax probabilities / per-row minmax data
    Tensor2 aux2;  // targets
    Vector weights;
  };

  VarId push(Node node);
  Tensor2& grad_of(std::size_t i);
  void backward_node(Node& n);

  std::vector<Node> nodes_;
};

// Convenience wrappers on single vectors.
Vector dense_forward(const DenseLayerParams& layer, const Vector& input, GradTape& tape);
double softmax_cross_entropy(const Vector& logits, const Vector& target, GradTape& tape);
Vector minmax_normalize(const Vector& v, GradTape& tape);
Vector stop_gradient(const Vector& v, GradTape& tape);

Vector softmax(std::span<const double> logits);

inline constexpr double kMinMaxEpsilon = 1e-8;

}  // namespace mzlab
