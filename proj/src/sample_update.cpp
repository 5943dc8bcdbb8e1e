#include "tgnn/sample_update.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tgnn {

namespace {

void check_shapes(const Matrix& h, const Adjacency& graph, const AttentionSamples& samples) {
  if (h.rows() != static_cast<Index>(graph.num_nodes()) || samples.num_nodes() != graph.num_nodes()) {
    throw ShapeError("sample update: representations " + shape_of(h) + ", graph " +
                     std::to_string(graph.num_nodes()) + " nodes, samples " + std::to_string(samples.num_nodes()));
  }
}

void dedupe(std::vector<NodeId>& pool) {
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
}

}  // namespace

std::vector<NodeId> select_from_pool(const Matrix& h, NodeId center, std::span<const NodeId> pool,
                                     std::size_t count) {
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(pool.size());
  for (NodeId j : pool) {
    if (j == center) continue;
    scored.emplace_back(h.row(center).dot(h.row(j)), j);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  scored.erase(std::unique(scored.begin(), scored.end(),
                           [](const auto& a, const auto& b) { return a.second == b.second; }),
               scored.end());
  count = std::min(count, scored.size());
  std::vector<NodeId> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<double> transition_probabilities(const Matrix& h, const Adjacency& graph, NodeId from) {
  const auto nb = graph.neighbors_of(from);
  std::vector<double> p(nb.size());
  if (nb.empty()) return p;
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nb.size(); ++i) {
    p[i] = h.row(from).dot(h.row(nb[i]));
    peak = std::max(peak, p[i]);
  }
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(x - peak);
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

AttentionSamples message_passing_update(const Matrix& h, const Adjacency& graph, const AttentionSamples& samples,
                                        MacCounter* counter) {
  check_shapes(h, graph, samples);
  AttentionSamples out = samples;
  std::vector<NodeId> pool;
  std::uint64_t macs = 0;
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    const auto own = samples.of(i);
    pool.assign(own.begin(), own.end());
    for (NodeId j : graph.neighbors_of(i)) {
      const auto theirs = samples.of(j);
      pool.insert(pool.end(), theirs.begin(), theirs.end());
    }
    dedupe(pool);
    macs += static_cast<std::uint64_t>(pool.size()) * static_cast<std::uint64_t>(h.cols());
    const auto chosen = select_from_pool(h, i, pool, samples.per_node());
    std::copy(chosen.begin(), chosen.end(), out.of(i).begin());
  }
  if (counter) counter->add(Phase::update, macs);
  return out;
}

AttentionSamples random_walk_update(const Matrix& h, const Adjacency& graph, const AttentionSamples& samples,
                                    const WalkConfig& cfg, Rng& rng, MacCounter* counter) {
  check_shapes(h, graph, samples);
  if (cfg.length < 1) throw ContractError("random_walk_update: walk length must be at least 1");
  AttentionSamples out = samples;
  std::vector<NodeId> pool;
  std::uint64_t macs = 0;
  const auto d = static_cast<std::uint64_t>(h.cols());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    const auto own = samples.of(i);
    pool.assign(own.begin(), own.end());
    for (NodeId start : own) {
      NodeId at = start;
      for (std::uint32_t step = 0; step < cfg.length; ++step) {
        const auto nb = graph.neighbors_of(at);
        if (nb.empty()) break;
        const auto p = transition_probabilities(h, graph, at);
        macs += nb.size() * d;
        const double u = unit_draw(rng);
        double acc = 0.0;
        std::size_t pick = nb.size() - 1;
        for (std::size_t c = 0; c < p.size(); ++c) {
          acc += p[c];
          if (u < acc) {
            pick = c;
            break;
          }
        }
        at = nb[pick];
        pool.push_back(at);
      }
    }
    dedupe(pool);
    macs += pool.size() * d;
    const auto chosen = select_from_pool(h, i, pool, samples.per_node());
    std::copy(chosen.begin(), chosen.end(), out.of(i).begin());
  }
  if (counter) counter->add(Phase::update, macs);
  return out;
}

}  // namespace tgnn
