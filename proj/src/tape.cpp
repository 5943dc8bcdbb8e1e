#include "tgnn/tape.hpp"

#include <algorithm>
#include <cmath>

namespace tgnn {

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape != this) throw ContractError("tape: operand recorded on a different tape");
    needs = needs || requires_grad(v.id);
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, needs ? std::move(backward) : nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

const Matrix& Tape::grad(int id) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(id));
  if (n.grad.size() == 0 && n.value.size() != 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

Matrix* Tape::grad_buffer(int id) {
  Node& n = nodes_.at(static_cast<std::size_t>(id));
  if (!n.requires_grad) return nullptr;
  if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  return &n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to a different tape");
  Node& out = nodes_.at(static_cast<std::size_t>(loss.id));
  if (out.value.rows() != 1 || out.value.cols() != 1) {
    throw ContractError("backward: loss must be 1x1, got " + shape_of(out.value));
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!out.requires_grad) return;
  out.grad = Matrix::Ones(1, 1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.backward && n.grad.size() != 0) n.backward(*this, n.grad);
  }
}

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("tape: invalid variable");
  return *a.tape;
}

std::uint64_t u64(Index v) { return static_cast<std::uint64_t>(v); }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: shape mismatch " + shape_of(av) + " * " + shape_of(bv));
  }
  t.count_macs(u64(av.rows()) * u64(av.cols()) * u64(bv.cols()));
  Matrix out(av.rows(), bv.cols());
  out.noalias() = av * bv;
  const Var in[] = {a, b};
  return t.record(std::move(out), in, [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a.id)) tp.accumulate(a.id, g * b.value().transpose());
    if (tp.requires_grad(b.id)) tp.accumulate(b.id, a.value().transpose() * g);
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(a.value(), b.value(), "add");
  const Var in[] = {a, b};
  return t.record(a.value() + b.value(), in, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a.id, g);
    tp.accumulate(b.id, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(a.value(), b.value(), "sub");
  const Var in[] = {a, b};
  return t.record(a.value() - b.value(), in, [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a.id, g);
    tp.accumulate(b.id, -g);
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  const Var in[] = {a};
  return t.record(a.value() * s, in, [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a.id, g * s); });
}

Var add_row(Var a, Var bias) {
  Tape& t = tape_of(a);
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != a.cols()) {
    throw ShapeError("add_row: bias " + shape_of(bv) + " does not broadcast over " + shape_of(a.value()));
  }
  Matrix out = a.value();
  out.rowwise() += bv.row(0);
  const Var in[] = {a, bias};
  return t.record(std::move(out), in, [a, bias](Tape& tp, const Matrix& g) {
    tp.accumulate(a.id, g);
    tp.accumulate(bias.id, g.colwise().sum());
  });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Matrix out = a.value().cwiseMax(0.0);
  const Var in[] = {a};
  return t.record(std::move(out), in, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a.id, (a.value().array() > 0.0).select(g, 0.0));
  });
}

Var softplus(Var a) {
  Tape& t = tape_of(a);
  const auto& x = a.value().array();
  // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
  Matrix out = (x.max(0.0) + (-x.abs()).exp().log1p()).matrix();
  const Var in[] = {a};
  return t.record(std::move(out), in, [a](Tape& tp, const Matrix& g) {
    const auto& xv = a.value().array();
    Matrix sig = (1.0 / (1.0 + (-xv).exp())).matrix();
    tp.accumulate(a.id, g.cwiseProduct(sig));
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const Var in[] = {a};
  return t.record(std::move(out), in, [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a.id, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var row_dot(Var a, Var b) {
  Tape& t = tape_of(a);
  require_same_shape(a.value(), b.value(), "row_dot");
  t.count_macs(u64(a.rows()) * u64(a.cols()));
  Matrix out = a.value().cwiseProduct(b.value()).rowwise().sum();
  const Var in[] = {a, b};
  return t.record(std::move(out), in, [a, b](Tape& tp, const Matrix& g) {
    const auto gb = g.col(0).asDiagonal();
    if (tp.requires_grad(a.id)) tp.accumulate(a.id, gb * b.value());
    if (tp.requires_grad(b.id)) tp.accumulate(b.id, gb * a.value());
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_cols: no operands");
  Tape& t = tape_of(parts.front());
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + shape_of(parts.front().value()) + " vs " +
                       shape_of(p.value()));
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const Var& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [saved](Tape& tp, const Matrix& g) {
    Index off = 0;
    for (const Var& p : saved) {
      tp.accumulate(p.id, g.middleCols(off, p.cols()));
      off += p.cols();
    }
  });
}

Var gather_rows(Var a, std::span<const Index> rows) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix out(static_cast<Index>(rows.size()), av.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= av.rows()) {
      throw ShapeError("gather_rows: row " + std::to_string(rows[r]) + " outside " + shape_of(av));
    }
    out.row(static_cast<Index>(r)) = av.row(rows[r]);
  }
  std::vector<Index> idx(rows.begin(), rows.end());
  const Var in[] = {a};
  return t.record(std::move(out), in, [a, idx = std::move(idx)](Tape& tp, const Matrix& g) {
    Matrix* ga = tp.grad_buffer(a.id);
    for (std::size_t r = 0; r < idx.size(); ++r) ga->row(idx[r]) += g.row(static_cast<Index>(r));
  });
}

Var slice_rows(Var a, Index begin, Index count) {
  Tape& t = tape_of(a);
  if (begin < 0 || count < 0 || begin + count > a.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") outside " + shape_of(a.value()));
  }
  const Var in[] = {a};
  return t.record(a.value().middleRows(begin, count), in, [a, begin, count](Tape& tp, const Matrix& g) {
    Matrix* ga = tp.grad_buffer(a.id);
    ga->middleRows(begin, count) += g;
  });
}

Var spmm(std::shared_ptr<const SparseMatrix> lhs, Var x) {
  Tape& t = tape_of(x);
  if (lhs->cols() != x.rows()) {
    throw ShapeError("spmm: shape mismatch " + shape_of(*lhs) + " * " + shape_of(x.value()));
  }
  t.count_macs(u64(lhs->nonZeros()) * u64(x.cols()));
  Matrix out = (*lhs) * x.value();
  const Var in[] = {x};
  return t.record(std::move(out), in, [lhs, x](Tape& tp, const Matrix& g) {
    tp.accumulate(x.id, lhs->transpose() * g);
  });
}

Var dropout(Var a, double rate, Rng* rng) {
  if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout: rate must be in [0, 1)");
  if (rate == 0.0 || rng == nullptr) return a;
  Tape& t = tape_of(a);
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(a.rows(), a.cols());
  const double inv = 1.0 / (1.0 - rate);
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? inv : 0.0;
  Matrix out = a.value().cwiseProduct(mask);
  const Var in[] = {a};
  return t.record(std::move(out), in, [a, mask = std::move(mask)](Tape& tp, const Matrix& g) {
    tp.accumulate(a.id, g.cwiseProduct(mask));
  });
}

Var sample_attention(Var query, Var keys, Var values, Index per_center, double rate, Rng* rng,
                     Matrix* weights_out) {
  Tape& t = tape_of(query);
  const Matrix& q = query.value();
  const Matrix& k = keys.value();
  const Matrix& v = values.value();
  const Index n = q.rows();
  const Index dh = q.cols();
  if (per_center < 1) throw ContractError("sample_attention: need at least one key per center");
  if (k.rows() != n * per_center || k.cols() != dh) {
    throw ShapeError("sample_attention: keys " + shape_of(k) + " do not match query " + shape_of(q) +
                     " with " + std::to_string(per_center) + " keys per center");
  }
  require_same_shape(k, v, "sample_attention(keys, values)");
  if (rate < 0.0 || rate >= 1.0) throw ContractError("sample_attention: dropout rate must be in [0, 1)");
  t.count_macs(2 * u64(n) * u64(per_center) * u64(dh));

  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix weights(n, per_center);
  for (Index i = 0; i < n; ++i) {
    weights.row(i).noalias() = (k.middleRows(i * per_center, per_center) * q.row(i).transpose()).transpose();
  }
  weights *= inv_sqrt;
  weights = softmax_rows(weights);
  if (weights_out) *weights_out = weights;

  Matrix mask;
  const bool drop = rate > 0.0 && rng != nullptr;
  if (drop) {
    std::bernoulli_distribution keep(1.0 - rate);
    const double inv = 1.0 / (1.0 - rate);
    mask.resize(n, per_center);
    for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? inv : 0.0;
  }

  Matrix out(n, dh);
  for (Index i = 0; i < n; ++i) {
    if (drop) {
      out.row(i).noalias() = weights.row(i).cwiseProduct(mask.row(i)) * v.middleRows(i * per_center, per_center);
    } else {
      out.row(i).noalias() = weights.row(i) * v.middleRows(i * per_center, per_center);
    }
  }

  const Var in[] = {query, keys, values};
  return t.record(std::move(out), in,
                  [query, keys, values, per_center, inv_sqrt, weights = std::move(weights),
                   mask = std::move(mask)](Tape& tp, const Matrix& g) {
                    const Matrix& qv = query.value();
                    const Matrix& kv = keys.value();
                    const Matrix& vv = values.value();
                    Matrix* gq = tp.grad_buffer(query.id);
                    Matrix* gk = tp.grad_buffer(keys.id);
                    Matrix* gv = tp.grad_buffer(values.id);
                    const bool masked = mask.size() != 0;
                    for (Index i = 0; i < qv.rows(); ++i) {
                      const auto vi = vv.middleRows(i * per_center, per_center);
                      const auto ki = kv.middleRows(i * per_center, per_center);
                      RowVector applied = masked ? RowVector(weights.row(i).cwiseProduct(mask.row(i)))
                                                 : RowVector(weights.row(i));
                      if (gv) gv->middleRows(i * per_center, per_center).noalias() += applied.transpose() * g.row(i);
                      // d(loss)/d(applied weights), then through the mask and the softmax.
                      RowVector ga = (vi * g.row(i).transpose()).transpose();
                      if (masked) ga = ga.cwiseProduct(mask.row(i));
                      const double dotp = ga.dot(weights.row(i));
                      RowVector gs = weights.row(i).cwiseProduct((ga.array() - dotp).matrix()) * inv_sqrt;
                      if (gq) gq->row(i).noalias() += gs * ki;
                      if (gk) gk->middleRows(i * per_center, per_center).noalias() += gs.transpose() * qv.row(i);
                    }
                  });
}

}  // namespace tgnn
