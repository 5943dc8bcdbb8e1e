#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgnn/dense.hpp"

namespace tgnn {

struct AdamState {
  std::uint64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update. Moment buffers are created on the first
/// call; afterwards the parameter list must keep the same shapes and order.
void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix> grads);

}  // namespace tgnn
