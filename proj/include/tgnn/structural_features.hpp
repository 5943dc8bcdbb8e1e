#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <vector>

#include "tgnn/attention_sampling.hpp"
#include "tgnn/graph.hpp"

namespace tgnn {

/// Sparse shortest-hop table over (center, sample) pairs.
class HopTable {
 public:
  std::optional<std::uint32_t> find(NodeId center, NodeId sample) const;
  void insert(NodeId center, NodeId sample, std::uint32_t hops);
  std::size_t size() const { return table_.size(); }
  /// (center, sample, hops) sorted by (center, sample).
  std::vector<std::tuple<NodeId, NodeId, std::uint32_t>> entries() const;

  bool operator==(const HopTable&) const = default;

 private:
  static std::uint64_t key(NodeId c, NodeId s) { return (static_cast<std::uint64_t>(c) << 32) | s; }
  std::unordered_map<std::uint64_t, std::uint32_t> table_;
};

/// Precomputed scalar structure: pairwise hops, degree and PageRank per node.
struct StructuralFeatures {
  std::uint32_t cap = 6;
  HopTable hops;
  std::vector<std::uint32_t> degree;
  std::vector<double> pagerank;
  bool pagerank_converged = true;

  /// hop(i, i) is 0; a missing pair throws ContractError naming it.
  std::uint32_t hop(NodeId center, NodeId sample) const;
  std::uint32_t max_degree() const;
  std::size_t num_nodes() const { return degree.size(); }

  bool operator==(const StructuralFeatures&) const = default;
};

struct PageRankOptions {
  double damping = 0.85;
  double tol = 1e-10;
  int max_iter = 200;
};

StructuralFeatures compute_structural_features(const Adjacency& graph, const AttentionSamples& samples,
                                               std::uint32_t cap = 6, const PageRankOptions& pr = {});

/// Fills in hops for (center, sample) pairs absent from the table with capped
/// BFS. Returns the number of pairs added.
std::size_t ensure_hops(StructuralFeatures& features, const Adjacency& graph, const AttentionSamples& samples);

// Features artifact: "TGPE", version u8, cap u32, N u64, hop pair count u64,
// (center u32, sample u32, hops u32) triples, N degrees u32, N PageRank f64.
inline constexpr std::uint8_t kFeaturesFormatVersion = 1;
void save_features(const StructuralFeatures& features, std::ostream& os);
StructuralFeatures load_features(std::istream& is);
void save_features(const StructuralFeatures& features, const std::filesystem::path& path);
StructuralFeatures load_features(const std::filesystem::path& path);

}  // namespace tgnn
