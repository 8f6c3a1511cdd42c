#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mzlab {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  std::vector<std::size_t> flagged;  // indices whose error exceeds the tolerance

  bool passed() const { return flagged.empty(); }
};

// Compares `analytic` against central differences of `loss` around `params`.
// Relative error is |a - n| / max(|a|, |n|, magnitude_floor). With a 1e-6 step,
// central differences of an O(10) loss carry ~1e-9 of rounding noise, so
// entries far below the floor cannot be resolved to a tight relative error.
GradCheckReport finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                                  std::span<const double> params, std::span<const double> analytic,
                                  double tolerance, double step = 1e-6,
                                  double magnitude_floor = 1e-3);

}  // namespace mzlab
