#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tgnn/dense.hpp"

namespace tgnn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_tensor = 0;
  Index worst_entry = 0;
  std::size_t coordinates = 0;
};

/// Relative error used by every gradient comparison:
/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-6);

/// Central finite differences of `loss` w.r.t. every coordinate of `params`
/// compared with `analytic`. Parameters are restored afterwards.
GradCheckResult finite_difference_check(std::span<Matrix* const> params, std::span<const Matrix> analytic,
                                        const std::function<double()>& loss, double h = 1e-5);

}  // namespace tgnn
