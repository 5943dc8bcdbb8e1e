#pragma once

#include "tgnn/dense.hpp"
#include "tgnn/tape.hpp"

namespace tgnn {

/// Two-layer perceptron weights: out = relu(x W1 + b1) W2 + b2.
/// Templated on the tensor type so the same layout serves stored
/// parameters (Matrix) and their tape bindings (Var).
template <typename T>
struct MlpWeights {
  T w1, b1, w2, b2;
};

inline MlpWeights<Matrix> make_mlp(Index in, Index hidden, Index out, Rng& rng) {
  return {xavier_uniform(in, hidden, rng), Matrix::Zero(1, hidden), xavier_uniform(hidden, out, rng),
          Matrix::Zero(1, out)};
}

inline Index mlp_input_width(const MlpWeights<Matrix>& p) { return p.w1.rows(); }
inline Index mlp_output_width(const MlpWeights<Matrix>& p) { return p.w2.cols(); }

template <typename Derived>
Matrix mlp_forward(const MlpWeights<Matrix>& p, const Eigen::MatrixBase<Derived>& input) {
  if (input.cols() != p.w1.rows()) {
    throw ShapeError("mlp_forward: input " + shape_of(input) + " but first layer expects width " +
                     std::to_string(p.w1.rows()));
  }
  Matrix hidden = input * p.w1;
  hidden.rowwise() += p.b1.row(0);
  hidden = hidden.cwiseMax(0.0);
  Matrix out = hidden * p.w2;
  out.rowwise() += p.b2.row(0);
  return out;
}

/// Tape-recorded variant; `rate` is inverted dropout on the hidden layer.
inline Var mlp_forward(const MlpWeights<Var>& p, Var input, double rate = 0.0, Rng* rng = nullptr) {
  if (input.cols() != p.w1.rows()) {
    throw ShapeError("mlp_forward: input " + shape_of(input.value()) + " but first layer expects width " +
                     std::to_string(p.w1.rows()));
  }
  Var hidden = relu(add_row(matmul(input, p.w1), p.b1));
  hidden = dropout(hidden, rate, rng);
  return add_row(matmul(hidden, p.w2), p.b2);
}

template <typename T, typename F>
void for_each_tensor(MlpWeights<T>& p, const std::string& prefix, F&& f) {
  f(prefix + ".w1", p.w1);
  f(prefix + ".b1", p.b1);
  f(prefix + ".w2", p.w2);
  f(prefix + ".b2", p.b2);
}

}  // namespace tgnn
