#include "mzlab/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mzlab {

namespace {

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                     std::to_string(b.cols));
  }
}

void require_row_weights(const Tensor2& a, const Vector& w, const char* op) {
  if (w.size() != a.rows) throw ShapeError(std::string(op) + ": one weight per row required");
}

}  // namespace

Vector softmax(std::span<const double> logits) {
  Vector p(logits.size());
  if (logits.empty()) return p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

VarId GradTape::push(Node node) {
  nodes_.push_back(std::move(node));
  return VarId{nodes_.size() - 1};
}

Tensor2& GradTape::grad_of(std::size_t i) {
  Node& n = nodes_[i];
  if (!n.has_grad) {
    n.grad = Tensor2(n.value.rows, n.value.cols);
    n.has_grad = true;
  }
  return n.grad;
}

Tensor2 GradTape::grad(VarId v) const {
  const Node& n = nodes_.at(v.index);
  if (n.has_grad) return n.grad;
  return Tensor2(n.value.rows, n.value.cols);
}

VarId GradTape::constant(Tensor2 value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

VarId GradTape::variable(Tensor2 value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

VarId GradTape::dense(VarId x, const DenseLayerParams& layer, DenseLayerParams* grad_sink) {
  const Tensor2& in = nodes_[x.index].value;
  if (in.cols != layer.in()) {
    throw ShapeError("dense: input width " + std::to_string(in.cols) + " but layer expects " +
                     std::to_string(layer.in()));
  }
  if (layer.biases.size() != layer.out()) throw ShapeError("dense: bias length mismatch");
  if (grad_sink && (grad_sink->weights.rows != layer.out() || grad_sink->weights.cols != layer.in() ||
                    grad_sink->biases.size() != layer.out())) {
    throw ShapeError("dense: gradient sink shape mismatch");
  }
  const std::size_t rows = in.rows, n_in = layer.in(), n_out = layer.out();
  Tensor2 out(rows, n_out);
  const double* w = layer.weights.values.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in.values.data() + r * n_in;
    double* yr = out.values.data() + r * n_out;
    for (std::size_t o = 0; o < n_out; ++o) {
      const double* wo = w + o * n_in;
      double acc = layer.biases[o];
      for (std::size_t i = 0; i < n_in; ++i) acc += wo[i] * xr[i];
      yr[o] = acc;
    }
  }
  Node n;
  n.op = Op::dense;
  n.a = x.index;
  n.value = std::move(out);
  n.layer = &layer;
  n.sink = grad_sink;
  n.requires_grad = nodes_[x.index].requires_grad || grad_sink != nullptr;
  return push(std::move(n));
}

VarId GradTape::elu(VarId x) {
  Node n;
  n.op = Op::elu;
  n.a = x.index;
  n.value = nodes_[x.index].value;
  for (double& v : n.value.values) v = mzlab::elu(v);
  n.requires_grad = nodes_[x.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::concat_cols(VarId a, VarId b) {
  const Tensor2& va = nodes_[a.index].value;
  const Tensor2& vb = nodes_[b.index].value;
  if (va.rows != vb.rows) throw ShapeError("concat_cols: row count mismatch");
  Tensor2 out(va.rows, va.cols + vb.cols);
  for (std::size_t r = 0; r < va.rows; ++r) {
    std::copy_n(va.values.data() + r * va.cols, va.cols, out.values.data() + r * out.cols);
    std::copy_n(vb.values.data() + r * vb.cols, vb.cols, out.values.data() + r * out.cols + va.cols);
  }
  Node n;
  n.op = Op::concat;
  n.a = a.index;
  n.b = b.index;
  n.value = std::move(out);
  n.requires_grad = nodes_[a.index].requires_grad || nodes_[b.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::minmax_normalize(VarId x) {
  const Tensor2& in = nodes_[x.index].value;
  if (in.cols == 0) throw ShapeError("minmax_normalize: empty rows");
  Tensor2 out(in.rows, in.cols);
  // aux row r: [argmin, argmax, denominator]
  Tensor2 aux(in.rows, 3);
  for (std::size_t r = 0; r < in.rows; ++r) {
    auto row = in.row_span(r);
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    const double mn = *lo, denom = *hi - *lo + kMinMaxEpsilon;
    aux(r, 0) = static_cast<double>(lo - row.begin());
    aux(r, 1) = static_cast<double>(hi - row.begin());
    aux(r, 2) = denom;
    for (std::size_t c = 0; c < in.cols; ++c) out(r, c) = (row[c] - mn) / denom;
  }
  Node n;
  n.op = Op::minmax;
  n.a = x.index;
  n.value = std::move(out);
  n.aux = std::move(aux);
  n.requires_grad = nodes_[x.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::stop_gradient(VarId x) {
  Node n;
  n.op = Op::stop_gradient;
  n.a = x.index;
  n.value = nodes_[x.index].value;
  n.requires_grad = false;
  return push(std::move(n));
}

VarId GradTape::scale_gradient(VarId x, double factor) {
  Node n;
  n.op = Op::scale_gradient;
  n.a = x.index;
  n.value = nodes_[x.index].value;
  n.factor = factor;
  n.requires_grad = nodes_[x.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::add(VarId a, VarId b) {
  const Tensor2& va = nodes_[a.index].value;
  const Tensor2& vb = nodes_[b.index].value;
  require_same_shape(va, vb, "add");
  Tensor2 out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += vb.values[i];
  Node n;
  n.op = Op::add;
  n.a = a.index;
  n.b = b.index;
  n.value = std::move(out);
  n.requires_grad = nodes_[a.index].requires_grad || nodes_[b.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::scale(VarId a, double factor) {
  Node n;
  n.op = Op::scale;
  n.a = a.index;
  n.value = nodes_[a.index].value;
  for (double& v : n.value.values) v *= factor;
  n.factor = factor;
  n.requires_grad = nodes_[a.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::mul(VarId a, VarId b) {
  const Tensor2& va = nodes_[a.index].value;
  const Tensor2& vb = nodes_[b.index].value;
  require_same_shape(va, vb, "mul");
  Tensor2 out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= vb.values[i];
  Node n;
  n.op = Op::mul;
  n.a = a.index;
  n.b = b.index;
  n.value = std::move(out);
  n.requires_grad = nodes_[a.index].requires_grad || nodes_[b.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::sum(VarId a) {
  double acc = 0.0;
  for (double v : nodes_[a.index].value.values) acc += v;
  Node n;
  n.op = Op::sum;
  n.a = a.index;
  n.value = Tensor2(1, 1, acc);
  n.requires_grad = nodes_[a.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::softmax_cross_entropy(VarId logits, const Tensor2& target,
                                      const Vector& row_weights) {
  const Tensor2& z = nodes_[logits.index].value;
  require_same_shape(z, target, "softmax_cross_entropy");
  require_row_weights(z, row_weights, "softmax_cross_entropy");
  Tensor2 probs(z.rows, z.cols);
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows; ++r) {
    auto t = target.row_span(r);
    double total = 0.0;
    for (double p : t) {
      if (!(p >= 0.0)) throw std::invalid_argument("softmax_cross_entropy: negative target probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("softmax_cross_entropy: target row does not sum to 1");
    }
    auto zr = z.row_span(r);
    const double mx = *std::max_element(zr.begin(), zr.end());
    double s = 0.0;
    for (double v : zr) s += std::exp(v - mx);
    const double log_z = mx + std::log(s);
    double row_loss = 0.0;
    for (std::size_t c = 0; c < z.cols; ++c) {
      const double log_p = zr[c] - log_z;
      probs(r, c) = std::exp(log_p);
      if (t[c] > 0.0) row_loss -= t[c] * log_p;
    }
    loss += row_weights[r] * row_loss;
  }
  Node n;
  n.op = Op::softmax_xent;
  n.a = logits.index;
  n.value = Tensor2(1, 1, loss);
  n.aux = std::move(probs);
  n.aux2 = target;
  n.weights = row_weights;
  n.requires_grad = nodes_[logits.index].requires_grad;
  return push(std::move(n));
}

VarId GradTape::squared_error(VarId a, VarId b, const Vector& row_weights) {
  const Tensor2& va = nodes_[a.index].value;
  const Tensor2& vb = nodes_[b.index].value;
  require_same_shape(va, vb, "squared_error");
  require_row_weights(va, row_weights, "squared_error");
  double loss = 0.0;
  for (std::size_t r = 0; r < va.rows; ++r) {
    double row = 0.0;
    for (std::size_t c = 0; c < va.cols; ++c) {
      const double d = va(r, c) - vb(r, c);
      row += d * d;
    }
    loss += row_weights[r] * row / static_cast<double>(va.cols);
  }
  Node n;
  n.op = Op::squared_error;
  n.a = a.index;
  n.b = b.index;
  n.value = Tensor2(1, 1, loss);
  n.weights = row_weights;
  n.requires_grad = nodes_[a.index].requires_grad || nodes_[b.index].requires_grad;
  return push(std::move(n));
}

namespace {
constexpr double kNormFloor = 1e-12;
}

VarId GradTape::cosine_distance(VarId a, VarId b, const Vector& row_weights) {
  const Tensor2& va = nodes_[a.index].value;
  const Tensor2& vb = nodes_[b.index].value;
  require_same_shape(va, vb, "cosine_distance");
  require_row_weights(va, row_weights, "cosine_distance");
  // aux row r: [|a|, |b|, cos]
  Tensor2 aux(va.rows, 3);
  double loss = 0.0;
  for (std::size_t r = 0; r < va.rows; ++r) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t c = 0; c < va.cols; ++c) {
      dot += va(r, c) * vb(r, c);
      na += va(r, c) * va(r, c);
      nb += vb(r, c) * vb(r, c);
    }
    na = std::max(std::sqrt(na), kNormFloor);
    nb = std::max(std::sqrt(nb), kNormFloor);
    const double cos = dot / (na * nb);
    aux(r, 0) = na;
    aux(r, 1) = nb;
    aux(r, 2) = cos;
    loss += row_weights[r] * (1.0 - cos);
  }
  Node n;
  n.op = Op::cosine;
  n.a = a.index;
  n.b = b.index;
  n.value = Tensor2(1, 1, loss);
  n.aux = std::move(aux);
  n.weights = row_weights;
  n.requires_grad = nodes_[a.index].requires_grad || nodes_[b.index].requires_grad;
  return push(std::move(n));
}

void GradTape::backward(VarId root) {
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor2();
  }
  Tensor2& seed = grad_of(root.index);
  std::fill(seed.values.begin(), seed.values.end(), 1.0);
  for (std::size_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.requires_grad) continue;
    backward_node(n);
  }
}

void GradTape::backward_node(Node& n) {
  const Tensor2& g = n.grad;
  auto wants = [&](std::size_t idx) { return nodes_[idx].requires_grad; };

  switch (n.op) {
    case Op::leaf:
    case Op::stop_gradient:
      return;

    case Op::dense: {
      const Tensor2& x = nodes_[n.a].value;
      const DenseLayerParams& layer = *n.layer;
      const std::size_t rows = x.rows, n_in = layer.in(), n_out = layer.out();
      if (n.sink) {
        double* gw = n.sink->weights.values.data();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* xr = x.values.data() + r * n_in;
          const double* gr = g.values.data() + r * n_out;
          for (std::size_t o = 0; o < n_out; ++o) {
            const double go = gr[o];
            if (go == 0.0) continue;
            double* gwo = gw + o * n_in;
            for (std::size_t k = 0; k < n_in; ++k) gwo[k] += go * xr[k];
            n.sink->biases[o] += go;
          }
        }
      }
      if (wants(n.a)) {
        Tensor2& gx = grad_of(n.a);
        const double* w = layer.weights.values.data();
        for (std::size_t r = 0; r < rows; ++r) {
          const double* gr = g.values.data() + r * n_out;
          double* gxr = gx.values.data() + r * n_in;
          for (std::size_t o = 0; o < n_out; ++o) {
            const double go = gr[o];
            if (go == 0.0) continue;
            const double* wo = w + o * n_in;
            for (std::size_t k = 0; k < n_in; ++k) gxr[k] += go * wo[k];
          }
        }
      }
      return;
    }

    case Op::elu: {
      if (!wants(n.a)) return;
      const Tensor2& x = nodes_[n.a].value;
      Tensor2& gx = grad_of(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) gx.values[i] += g.values[i] * elu_grad(x.values[i]);
      return;
    }

    case Op::concat: {
      const std::size_t ca = nodes_[n.a].value.cols, cb = nodes_[n.b].value.cols;
      if (wants(n.a)) {
        Tensor2& ga = grad_of(n.a);
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t c = 0; c < ca; ++c) ga(r, c) += g(r, c);
      }
      if (wants(n.b)) {
        Tensor2& gb = grad_of(n.b);
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t c = 0; c < cb; ++c) gb(r, c) += g(r, ca + c);
      }
      return;
    }

    case Op::minmax: {
      if (!wants(n.a)) return;
      const Tensor2& x = nodes_[n.a].value;
      Tensor2& gx = grad_of(n.a);
      for (std::size_t r = 0; r < x.rows; ++r) {
        const auto lo = static_cast<std::size_t>(n.aux(r, 0));
        const auto hi = static_cast<std::size_t>(n.aux(r, 1));
        const double denom = n.aux(r, 2);
        const double mn = x(r, lo);
        // y_c = (x_c - mn) / (mx - mn + eps)
        double d_min = 0.0, d_max = 0.0;
        for (std::size_t c = 0; c < x.cols; ++c) {
          const double gy = g(r, c);
          const double shifted = (x(r, c) - mn) / (denom * denom);
          gx(r, c) += gy / denom;
          d_min += gy * (shifted - 1.0 / denom);
          d_max -= gy * shifted;
        }
        gx(r, lo) += d_min;
        gx(r, hi) += d_max;
      }
      return;
    }

    case Op::scale_gradient: {
      if (!wants(n.a)) return;
      Tensor2& gx = grad_of(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) gx.values[i] += n.factor * g.values[i];
      return;
    }

    case Op::add: {
      for (std::size_t idx : {n.a, n.b}) {
        if (!wants(idx)) continue;
        Tensor2& gx = grad_of(idx);
        for (std::size_t i = 0; i < g.size(); ++i) gx.values[i] += g.values[i];
      }
      return;
    }

    case Op::scale: {
      if (!wants(n.a)) return;
      Tensor2& gx = grad_of(n.a);
      for (std::size_t i = 0; i < g.size(); ++i) gx.values[i] += n.factor * g.values[i];
      return;
    }

    case Op::mul: {
      const Tensor2& va = nodes_[n.a].value;
      const Tensor2& vb = nodes_[n.b].value;
      if (wants(n.a)) {
        Tensor2& ga = grad_of(n.a);
        for (std::size_t i = 0; i < g.size(); ++i) ga.values[i] += g.values[i] * vb.values[i];
      }
      if (wants(n.b)) {
        Tensor2& gb = grad_of(n.b);
        for (std::size_t i = 0; i < g.size(); ++i) gb.values[i] += g.values[i] * va.values[i];
      }
      return;
    }

    case Op::sum: {
      if (!wants(n.a)) return;
      Tensor2& gx = grad_of(n.a);
      const double s = g.values[0];
      for (double& v : gx.values) v += s;
      return;
    }

    case Op::softmax_xent: {
      if (!wants(n.a)) return;
      Tensor2& gx = grad_of(n.a);
      const double s = g.values[0];
      for (std::size_t r = 0; r < gx.rows; ++r) {
        const double w = s * n.weights[r];
        if (w == 0.0) continue;
        for (std::size_t c = 0; c < gx.cols; ++c) gx(r, c) += w * (n.aux(r, c) - n.aux2(r, c));
      }
      return;
    }

    case Op::squared_error: {
      const Tensor2& va = nodes_[n.a].value;
      const Tensor2& vb = nodes_[n.b].value;
      const double s = g.values[0] * 2.0 / static_cast<double>(va.cols);
      const bool ga_on = wants(n.a), gb_on = wants(n.b);
      Tensor2* ga = ga_on ? &grad_of(n.a) : nullptr;
      Tensor2* gb = gb_on ? &grad_of(n.b) : nullptr;
      for (std::size_t r = 0; r < va.rows; ++r) {
        const double w = s * n.weights[r];
        if (w == 0.0) continue;
        for (std::size_t c = 0; c < va.cols; ++c) {
          const double d = w * (va(r, c) - vb(r, c));
          if (ga) (*ga)(r, c) += d;
          if (gb) (*gb)(r, c) -= d;
        }
      }
      return;
    }

    case Op::cosine: {
      const Tensor2& va = nodes_[n.a].value;
      const Tensor2& vb = nodes_[n.b].value;
      const double s = g.values[0];
      Tensor2* ga = wants(n.a) ? &grad_of(n.a) : nullptr;
      Tensor2* gb = wants(n.b) ? &grad_of(n.b) : nullptr;
      for (std::size_t r = 0; r < va.rows; ++r) {
        const double w = s * n.weights[r];
        if (w == 0.0) continue;
        const double na = n.aux(r, 0), nb = n.aux(r, 1), cos = n.aux(r, 2);
        // d(1 - cos)/da = -(b / (|a||b|) - cos * a / |a|^2)
        for (std::size_t c = 0; c < va.cols; ++c) {
          if (ga) (*ga)(r, c) -= w * (vb(r, c) / (na * nb) - cos * va(r, c) / (na * na));
          if (gb) (*gb)(r, c) -= w * (va(r, c) / (na * nb) - cos * vb(r, c) / (nb * nb));
        }
      }
      return;
    }
  }
}

Vector dense_forward(const DenseLayerParams& layer, const Vector& input, GradTape& tape) {
  const VarId x = tape.constant(Tensor2::row(input));
  return tape.value(tape.dense(x, layer, nullptr)).values;
}

double softmax_cross_entropy(const Vector& logits, const Vector& target, GradTape& tape) {
  if (logits.size() != target.size()) throw ShapeError("softmax_cross_entropy: length mismatch");
  const VarId z = tape.variable(Tensor2::row(logits));
  return tape.scalar(tape.softmax_cross_entropy(z, Tensor2::row(target), Vector{1.0}));
}

Vector minmax_normalize(const Vector& v, GradTape& tape) {
  return tape.value(tape.minmax_normalize(tape.variable(Tensor2::row(v)))).values;
}

Vector stop_gradient(const Vector& v, GradTape& tape) {
  return tape.value(tape.stop_gradient(tape.variable(Tensor2::row(v)))).values;
}

}  // namespace mzlab
