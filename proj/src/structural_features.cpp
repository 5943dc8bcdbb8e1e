#include "tgnn/structural_features.hpp"

#include <algorithm>
#include <fstream>
#include <tuple>

#include "tgnn/binary_io.hpp"

namespace tgnn {

std::optional<std::uint32_t> HopTable::find(NodeId center, NodeId sample) const {
  auto it = table_.find(key(center, sample));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

void HopTable::insert(NodeId center, NodeId sample, std::uint32_t hops) { table_[key(center, sample)] = hops; }

std::vector<std::tuple<NodeId, NodeId, std::uint32_t>> HopTable::entries() const {
  std::vector<std::tuple<NodeId, NodeId, std::uint32_t>> out;
  out.reserve(table_.size());
  for (const auto& [k, h] : table_) out.emplace_back(static_cast<NodeId>(k >> 32), static_cast<NodeId>(k & 0xffffffffu), h);
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t StructuralFeatures::hop(NodeId center, NodeId sample) const {
  if (center == sample) return 0;
  if (auto h = hops.find(center, sample)) return *h;
  throw ContractError("no hop entry for pair (" + std::to_string(center) + ", " + std::to_string(sample) + ")");
}

std::uint32_t StructuralFeatures::max_degree() const {
  return degree.empty() ? 0 : *std::max_element(degree.begin(), degree.end());
}

std::size_t ensure_hops(StructuralFeatures& features, const Adjacency& graph, const AttentionSamples& samples) {
  if (samples.num_nodes() != graph.num_nodes()) {
    throw ShapeError("ensure_hops: samples cover " + std::to_string(samples.num_nodes()) + " nodes, graph has " +
                     std::to_string(graph.num_nodes()));
  }
  std::size_t added = 0;
  std::vector<NodeId> missing;
  for (NodeId c = 0; c < graph.num_nodes(); ++c) {
    missing.clear();
    for (NodeId s : samples.of(c)) {
      if (!features.hops.find(c, s)) missing.push_back(s);
    }
    if (missing.empty()) continue;
    const auto h = bfs_hops(graph, c, missing, features.cap);
    for (std::size_t i = 0; i < missing.size(); ++i) features.hops.insert(c, missing[i], h[i]);
    added += missing.size();
  }
  return added;
}

StructuralFeatures compute_structural_features(const Adjacency& graph, const AttentionSamples& samples,
                                               std::uint32_t cap, const PageRankOptions& pr) {
  if (cap < 1) throw ContractError("structural features: hop cap must be at least 1");
  StructuralFeatures f;
  f.cap = cap;
  f.degree = degrees(graph);
  auto rank = pagerank(graph, pr.damping, pr.tol, pr.max_iter);
  f.pagerank = std::move(rank.values);
  f.pagerank_converged = rank.converged;
  ensure_hops(f, graph, samples);
  return f;
}

void save_features(const StructuralFeatures& features, std::ostream& os) {
  io::write_header(os, "TGPE", kFeaturesFormatVersion);
  io::write_u32(os, features.cap);
  io::write_u64(os, features.degree.size());
  const auto entries = features.hops.entries();
  io::write_u64(os, entries.size());
  for (const auto& [c, s, h] : entries) {
    io::write_u32(os, c);
    io::write_u32(os, s);
    io::write_u32(os, h);
  }
  for (auto d : features.degree) io::write_u32(os, d);
  for (double p : features.pagerank) io::write_f64(os, p);
}

StructuralFeatures load_features(std::istream& is) {
  io::read_header(is, "TGPE", kFeaturesFormatVersion);
  StructuralFeatures f;
  f.cap = io::read_u32(is);
  const std::uint64_t n = io::read_u64(is);
  const std::uint64_t pairs = io::read_u64(is);
  if (n > (1ull << 31) || pairs > (1ull << 40)) throw ArtifactError("features artifact header is implausible");
  for (std::uint64_t i = 0; i < pairs; ++i) {
    const NodeId c = io::read_u32(is);
    const NodeId s = io::read_u32(is);
    const std::uint32_t h = io::read_u32(is);
    f.hops.insert(c, s, h);
  }
  f.degree.resize(n);
  for (auto& d : f.degree) d = io::read_u32(is);
  f.pagerank.resize(n);
  for (auto& p : f.pagerank) p = io::read_f64(is);
  return f;
}

void save_features(const StructuralFeatures& features, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArtifactError("cannot write " + path.string());
  save_features(features, os);
}

StructuralFeatures load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArtifactError("cannot read " + path.string());
  return load_features(is);
}

}  // namespace tgnn
