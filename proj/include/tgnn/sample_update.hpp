#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tgnn/attention_sampling.hpp"
#include "tgnn/flops.hpp"

namespace tgnn {

struct WalkConfig {
  std::uint32_t length = 3;
};

/// The `count` pool members with the largest h_center . h_j, center excluded,
/// ties by ascending id.
std::vector<NodeId> select_from_pool(const Matrix& h, NodeId center, std::span<const NodeId> pool,
                                     std::size_t count);

/// Softmax over h_from . h_l for l in N(from), in neighbor order. Empty for an
/// isolated node.
std::vector<double> transition_probabilities(const Matrix& h, const Adjacency& graph, NodeId from);

/// Pool = Smp(i) plus the samples of every neighbor of i; re-selected by
/// similarity to h_i.
AttentionSamples message_passing_update(const Matrix& h, const Adjacency& graph, const AttentionSamples& samples,
                                        MacCounter* counter = nullptr);

/// One L-step walk from each current sample; pool = Smp(i) plus every visited
/// node; re-selected by similarity to h_i.
AttentionSamples random_walk_update(const Matrix& h, const Adjacency& graph, const AttentionSamples& samples,
                                    const WalkConfig& cfg, Rng& rng, MacCounter* counter = nullptr);

/// Uniform double in [0, 1) from 53 random bits.
inline double unit_draw(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace tgnn
