#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tgnn/graph.hpp"

namespace tgnn {

/// Planted-cluster implicit feedback. User u and item j belong to cluster
/// u % clusters and j % clusters. Each interaction picks an item of the
/// user's own cluster with probability `in_cluster` (mildly Zipf-weighted
/// inside the cluster) and a uniformly random item otherwise.
struct SyntheticConfig {
  std::size_t users = 1000;
  std::size_t items = 1500;
  std::size_t clusters = 20;
  std::size_t min_interactions = 15;
  std::size_t max_interactions = 30;
  double in_cluster = 0.8;
  double zipf_exponent = 0.7;
  std::uint64_t seed = 7;
};

std::vector<Interaction> generate_synthetic(const SyntheticConfig& cfg);
InteractionGraph synthetic_graph(const SyntheticConfig& cfg);
/// TSV lines `user item timestamp 1`.
void write_synthetic_tsv(const SyntheticConfig& cfg, std::ostream& out);

}  // namespace tgnn
