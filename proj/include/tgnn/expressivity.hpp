#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

#include "tgnn/dense.hpp"
#include "tgnn/graph.hpp"

namespace tgnn {

struct ReductionCheck {
  bool passed = false;
  double max_deviation = 0.0;
};

/// Builds a single-head Transformer layer whose attention is masked onto the
/// node itself (top-1 self mask), W_v = diag(sqrt(d) - 1 + perturbation), no
/// residual, and output (1/sqrt(d)) (attention + H); feeds it to a GCN layer
/// relu(A H_out W) and compares with relu(A H W) on a random 10-node graph.
ReductionCheck gnn_reduction_check(Index dim, double tolerance, std::uint64_t seed,
                                   double perturbation = 0.0);

/// Joint 1-WL color refinement over several graphs until the partition is
/// stable. Returns one color list per graph; colors are comparable across graphs.
std::vector<std::vector<std::uint64_t>> wl_refine(const std::vector<const Adjacency*>& graphs, int* rounds = nullptr);

struct WlReport {
  bool wl_equal = false;
  bool hops_differ = false;
  int rounds = 0;
  std::map<std::uint64_t, std::size_t> histogram_a, histogram_b;
  /// Per node, the sorted hop counts to every node of its graph (capped), sorted.
  std::vector<std::vector<std::uint32_t>> hops_a, hops_b;

  bool distinguishes() const { return wl_equal && hops_differ; }
};

WlReport wl_distinguish_check(const Adjacency& a, const Adjacency& b, std::uint32_t cap = 6);

/// The 6-cycle and two disjoint triangles: 1-WL cannot tell them apart.
std::pair<Adjacency, Adjacency> builtin_wl_pair();

/// Two graphs as `u v` edge lines separated by a `---` line. An optional
/// `nodes <count>` line declares isolated trailing nodes.
std::pair<Adjacency, Adjacency> parse_graph_pair(std::istream& in);

}  // namespace tgnn
