#include "tgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace tgnn {

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

GradCheckResult finite_difference_check(std::span<Matrix* const> params, std::span<const Matrix> analytic,
                                        const std::function<double()>& loss, double h) {
  if (!(h > 0.0)) throw ContractError("finite_difference_check: h must be positive");
  if (params.size() != analytic.size()) throw ShapeError("finite_difference_check: gradient count mismatch");
  GradCheckResult result;
  for (std::size_t t = 0; t < params.size(); ++t) {
    Matrix& p = *params[t];
    require_same_shape(p, analytic[t], "finite_difference_check");
    for (Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double up = loss();
      p.data()[i] = saved - h;
      const double down = loss();
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(numeric, analytic[t].data()[i]);
      ++result.coordinates;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_tensor = t;
        result.worst_entry = i;
      }
    }
  }
  return result;
}

}  // namespace tgnn
