#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "tgnn/errors.hpp"

namespace tgnn {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using DenseRowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = DenseMatrix<double>;
using RowVector = DenseRowVector<double>;

/// The engine's PRNG. Seeded explicitly everywhere; its textual state is
/// persisted in checkpoints.
using Rng = std::mt19937_64;

template <typename Derived>
std::string shape_of(const Eigen::EigenBase<Derived>& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

template <typename A, typename B>
void require_same_shape(const Eigen::EigenBase<A>& a, const Eigen::EigenBase<B>& b,
                        std::string_view op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, std::string_view what) {
  if (!m.allFinite()) {
    throw NumericError("non-finite values in " + std::string(what) + " (" + shape_of(m) + ")");
  }
}

/// Row-wise softmax with per-row max subtraction.
template <typename Derived>
DenseMatrix<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  DenseMatrix<Scalar> out(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r) {
    if (a.cols() == 0) continue;
    const Scalar peak = a.row(r).maxCoeff();
    out.row(r) = (a.row(r).array() - peak).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

/// Xavier-uniform initialization, bound sqrt(6 / (fan_in + fan_out)).
inline Matrix xavier_uniform(Index rows, Index cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

inline Matrix uniform_matrix(Index rows, Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

inline Matrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace tgnn
