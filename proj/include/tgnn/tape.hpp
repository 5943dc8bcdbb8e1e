#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "tgnn/dense.hpp"
#include "tgnn/flops.hpp"

namespace tgnn {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  const Matrix& grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool valid() const { return tape != nullptr && id >= 0; }
};

/// Reverse-mode differentiation record. Nodes are appended in evaluation
/// order, so the node list is always topologically sorted. Values are never
/// mutated after recording.
class Tape {
 public:
  /// Receives the tape and the gradient flowing into the recorded node.
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  explicit Tape(MacCounter* counter = nullptr) : counter_(counter) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Differentiable input (a parameter).
  Var leaf(Matrix value);
  /// Non-differentiable input.
  Var constant(Matrix value);

  /// Appends a node. `backward` is dropped when no input requires a gradient.
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  /// Propagates d(loss)/d(node) from a 1x1 node to every node on the tape.
  void backward(Var loss);

  const Matrix& value(int id) const { return nodes_.at(static_cast<std::size_t>(id)).value; }
  /// Gradient buffer; zeros if nothing flowed into the node.
  const Matrix& grad(int id) const;
  bool requires_grad(int id) const { return nodes_.at(static_cast<std::size_t>(id)).requires_grad; }

  /// Used by backward closures: adds `g` into the gradient of `id`.
  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.grad += g;
  }
  /// Mutable gradient buffer for scatter-style accumulation (allocated on demand).
  Matrix* grad_buffer(int id);

  std::size_t size() const { return nodes_.size(); }
  MacCounter* counter() const { return counter_; }
  void count_macs(std::uint64_t macs) const {
    if (counter_) counter_->add(macs);
  }

 private:
  struct Node {
    Matrix value;
    mutable Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::deque<Node> nodes_;
  MacCounter* counter_;
};

// Differentiable primitives. All operands must live on the same tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
/// a + bias, bias is 1 x a.cols() and broadcast over rows.
Var add_row(Var a, Var bias);
/// max(x, 0); subgradient at 0 is 0.
Var relu(Var a);
Var softplus(Var a);
/// Sum of all entries as a 1x1 value.
Var sum(Var a);
/// Row-wise inner products, a.rows() x 1.
Var row_dot(Var a, Var b);
Var concat_cols(std::span<const Var> parts);
Var gather_rows(Var a, std::span<const Index> rows);
Var slice_rows(Var a, Index begin, Index count);
/// Sparse constant times dense variable.
Var spmm(std::shared_ptr<const SparseMatrix> lhs, Var x);
/// Inverted dropout; identity when `rate` is 0 or `rng` is null.
Var dropout(Var a, double rate, Rng* rng);

/// Single-head attention of each center over its own fixed-size block of keys.
///
/// `query` is N x dh. `keys` and `values` are (N*per_center) x dh; rows
/// [i*per_center, (i+1)*per_center) belong to center i. Returns N x dh with
/// row i = softmax(q_i K_i^T / sqrt(dh)) V_i. Attention weights get inverted
/// dropout when `rate` > 0. When `weights_out` is given it receives the
/// pre-dropout N x per_center attention matrix.
Var sample_attention(Var query, Var keys, Var values, Index per_center, double rate, Rng* rng,
                     Matrix* weights_out = nullptr);

}  // namespace tgnn
