#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "tgnn/dense.hpp"
#include "tgnn/flops.hpp"
#include "tgnn/graph.hpp"

namespace tgnn {

/// Per-node attention samples. Every node holds exactly `per_node` ids
/// (min(k, N - 1)), never itself, without duplicates; ids are ordered by
/// descending similarity with ties broken by ascending id.
class AttentionSamples {
 public:
  AttentionSamples() = default;
  AttentionSamples(std::uint32_t k, std::size_t num_nodes);

  std::uint32_t k() const { return k_; }
  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t per_node() const { return per_node_; }

  std::span<const NodeId> of(NodeId v) const { return {ids_.data() + v * per_node_, per_node_}; }
  std::span<NodeId> of(NodeId v) { return {ids_.data() + v * per_node_, per_node_}; }
  /// Center-major flat id list, length num_nodes * per_node.
  const std::vector<NodeId>& flat() const { return ids_; }

  /// Throws ContractError when the type invariants do not hold.
  void validate() const;

  bool operator==(const AttentionSamples&) const = default;

 private:
  std::uint32_t k_ = 0;
  std::size_t num_nodes_ = 0;
  std::size_t per_node_ = 0;
  std::vector<NodeId> ids_;
};

/// Which similarity drives sample selection.
enum class SamplingMode {
  propagated,  // S = X X^T, then S + alpha (A + I) S
  raw,         // S = X X^T only
  structural,  // nearest nodes by hop distance (BFS order); no similarity
};

template <typename Scalar>
DenseMatrix<Scalar> raw_similarity(const DenseMatrix<Scalar>& x) {
  DenseMatrix<Scalar> s(x.rows(), x.rows());
  s.noalias() = x * x.transpose();
  return s;
}

/// S + alpha * (A + I) * S through sparse row gathers.
template <typename Scalar>
DenseMatrix<Scalar> propagate_similarity(const DenseMatrix<Scalar>& s, const Adjacency& graph, Scalar alpha) {
  if (s.rows() != static_cast<Index>(graph.num_nodes()) || s.cols() != s.rows()) {
    throw ShapeError("propagate_similarity: similarity " + shape_of(s) + " does not match a graph of " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  DenseMatrix<Scalar> out = (Scalar(1) + alpha) * s;
  for (Index i = 0; i < s.rows(); ++i) {
    for (NodeId j : graph.neighbors_of(static_cast<NodeId>(i))) out.row(i) += alpha * s.row(j);
  }
  return out;
}

/// Indices of the `count` largest entries of `row`, skipping `self`; ties go
/// to the smaller index.
std::vector<NodeId> top_k_row(std::span<const double> row, std::size_t count, NodeId self);

AttentionSamples top_k_samples(const Matrix& similarity, std::uint32_t k);

/// k nearest other nodes in BFS order (ties by id); unreachable nodes fill
/// the remainder in ascending id order.
AttentionSamples structural_samples(const Adjacency& graph, std::uint32_t k);

struct SamplingOptions {
  std::uint32_t k = 10;
  double alpha = 0.5;
  SamplingMode mode = SamplingMode::propagated;
  /// Above this node count S is never materialized as N x N.
  std::size_t dense_threshold = 20000;
  std::size_t block_rows = 256;
};

AttentionSamples build_attention_samples(const Matrix& x, const Adjacency& graph, const SamplingOptions& opts,
                                         MacCounter* counter = nullptr);
/// Row-blocked path: ((I + alpha A_hat) X) X^T one block of rows at a time.
AttentionSamples build_attention_samples_blocked(const Matrix& x, const Adjacency& graph,
                                                 const SamplingOptions& opts, MacCounter* counter = nullptr);

// Samples artifact: "TGSM", version u8, k u32, N u64, embedding seed u64,
// embedding width u32, then N lists of (length u32, ids u32...).
inline constexpr std::uint8_t kSamplesFormatVersion = 1;

struct SamplesProvenance {
  std::uint64_t seed = 0;
  std::uint32_t embed_dim = 0;
};

void save_samples(const AttentionSamples& samples, const SamplesProvenance& prov, std::ostream& os);
AttentionSamples load_samples(std::istream& is, SamplesProvenance* prov = nullptr);
void save_samples(const AttentionSamples& samples, const SamplesProvenance& prov, const std::filesystem::path& path);
AttentionSamples load_samples(const std::filesystem::path& path, SamplesProvenance* prov = nullptr);

}  // namespace tgnn
