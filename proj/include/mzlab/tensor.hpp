#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mzlab {

using Vector = std::vector<double>;

// Thrown on any dimension disagreement between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major matrix of doubles. A single row doubles as a vector.
struct Tensor2 {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector values;

  Tensor2() = default;
  Tensor2(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}
  Tensor2(std::size_t r, std::size_t c, Vector v) : rows(r), cols(c), values(std::move(v)) {
    if (values.size() != rows * cols) {
      throw ShapeError("Tensor2: value count " + std::to_string(values.size()) +
                       " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  static Tensor2 row(std::span<const double> v) { return {1, v.size(), Vector(v.begin(), v.end())}; }

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  std::span<double> row_span(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row_span(std::size_t r) const { return {values.data() + r * cols, cols}; }

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  bool operator==(const Tensor2&) const = default;
};

}  // namespace mzlab
