#include "mzlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mzlab/tensor.hpp"

namespace mzlab {

GradCheckReport finite_diff_check(const std::function<double(std::span<const double>)>& loss,
                                  std::span<const double> params, std::span<const double> analytic,
                                  double tolerance, double step, double magnitude_floor) {
  if (params.size() != analytic.size()) throw ShapeError("finite_diff_check: gradient length mismatch");
  GradCheckReport report;
  std::vector<double> probe(params.begin(), params.end());
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double original = probe[i];
    // Divide by the representable spacing actually used, not 2 * step.
    const double hi = original + step, lo = original - step;
    probe[i] = hi;
    const double up = loss(probe);
    probe[i] = lo;
    const double down = loss(probe);
    probe[i] = original;
    const double numeric = (up - down) / (hi - lo);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), magnitude_floor});
    const double err = std::abs(analytic[i] - numeric) / denom;
    if (err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = i;
    }
    if (!(err < tolerance)) report.flagged.push_back(i);
    ++report.checked;
  }
  return report;
}

}  // namespace mzlab
