#include "tgnn/attention_sampling.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "tgnn/binary_io.hpp"

namespace tgnn {

AttentionSamples::AttentionSamples(std::uint32_t k, std::size_t num_nodes)
    : k_(k),
      num_nodes_(num_nodes),
      per_node_(num_nodes == 0 ? 0 : std::min<std::size_t>(k, num_nodes - 1)),
      ids_(num_nodes * per_node_, 0) {}

void AttentionSamples::validate() const {
  if (ids_.size() != num_nodes_ * per_node_) throw ContractError("AttentionSamples: id list has the wrong length");
  if (num_nodes_ > 0 && per_node_ != std::min<std::size_t>(k_, num_nodes_ - 1)) {
    throw ContractError("AttentionSamples: per-node count is not min(k, N - 1)");
  }
  std::vector<NodeId> sorted;
  for (NodeId v = 0; v < num_nodes_; ++v) {
    const auto s = of(v);
    sorted.assign(s.begin(), s.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] >= num_nodes_) {
        throw ContractError("AttentionSamples: node " + std::to_string(v) + " samples unknown id " +
                            std::to_string(sorted[i]));
      }
      if (sorted[i] == v) throw ContractError("AttentionSamples: node " + std::to_string(v) + " samples itself");
      if (i > 0 && sorted[i] == sorted[i - 1]) {
        throw ContractError("AttentionSamples: node " + std::to_string(v) + " has duplicate sample " +
                            std::to_string(sorted[i]));
      }
    }
  }
}

std::vector<NodeId> top_k_row(std::span<const double> row, std::size_t count, NodeId self) {
  std::vector<NodeId> ids;
  ids.reserve(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != self) ids.push_back(static_cast<NodeId>(j));
  }
  count = std::min(count, ids.size());
  auto better = [&](NodeId a, NodeId b) { return row[a] != row[b] ? row[a] > row[b] : a < b; };
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(count), ids.end(), better);
  ids.resize(count);
  return ids;
}

AttentionSamples top_k_samples(const Matrix& similarity, std::uint32_t k) {
  if (k < 1) throw ContractError("top_k_samples: k must be at least 1");
  if (similarity.rows() != similarity.cols()) throw ShapeError("top_k_samples: similarity must be square");
  const std::size_t n = static_cast<std::size_t>(similarity.rows());
  AttentionSamples out(k, n);
  for (NodeId i = 0; i < n; ++i) {
    const auto ids = top_k_row({similarity.row(i).data(), n}, out.per_node(), i);
    std::copy(ids.begin(), ids.end(), out.of(i).begin());
  }
  return out;
}

AttentionSamples structural_samples(const Adjacency& graph, std::uint32_t k) {
  if (k < 1) throw ContractError("structural_samples: k must be at least 1");
  const std::size_t n = graph.num_nodes();
  AttentionSamples out(k, n);
  const std::size_t want = out.per_node();
  for (NodeId c = 0; c < n; ++c) {
    std::vector<NodeId> order;
    std::vector<NodeId> frontier{c}, next;
    std::vector<char> seen(n, 0);
    seen[c] = 1;
    while (!frontier.empty() && order.size() < want) {
      next.clear();
      for (NodeId v : frontier) {
        for (NodeId w : graph.neighbors_of(v)) {
          if (!seen[w]) {
            seen[w] = 1;
            next.push_back(w);
          }
        }
      }
      std::sort(next.begin(), next.end());
      for (NodeId w : next) {
        if (order.size() < want) order.push_back(w);
      }
      frontier.swap(next);
    }
    for (NodeId w = 0; w < n && order.size() < want; ++w) {
      if (!seen[w]) order.push_back(w);
    }
    std::copy(order.begin(), order.end(), out.of(c).begin());
  }
  return out;
}

namespace {

std::uint64_t u64(std::size_t v) { return static_cast<std::uint64_t>(v); }

void check_inputs(const Matrix& x, const Adjacency& graph, const SamplingOptions& opts) {
  if (opts.k < 1) throw ContractError("attention sampling: k must be at least 1");
  if (x.rows() != static_cast<Index>(graph.num_nodes())) {
    throw ShapeError("attention sampling: features " + shape_of(x) + " for a graph of " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  require_finite(x, "node features");
}

}  // namespace

AttentionSamples build_attention_samples(const Matrix& x, const Adjacency& graph, const SamplingOptions& opts,
                                         MacCounter* counter) {
  check_inputs(x, graph, opts);
  if (opts.mode == SamplingMode::structural) return structural_samples(graph, opts.k);
  if (graph.num_nodes() > opts.dense_threshold) return build_attention_samples_blocked(x, graph, opts, counter);
  const std::size_t n = graph.num_nodes();
  Matrix s = raw_similarity(x);
  if (counter) counter->add(Phase::precompute, u64(n) * u64(n) * u64(x.cols()));
  if (opts.mode == SamplingMode::propagated) {
    s = propagate_similarity(s, graph, opts.alpha);
    if (counter) counter->add(Phase::precompute, u64(graph.neighbors.size() + n) * u64(n));
  }
  return top_k_samples(s, opts.k);
}

AttentionSamples build_attention_samples_blocked(const Matrix& x, const Adjacency& graph,
                                                 const SamplingOptions& opts, MacCounter* counter) {
  check_inputs(x, graph, opts);
  if (opts.mode == SamplingMode::structural) return structural_samples(graph, opts.k);
  const std::size_t n = graph.num_nodes();
  // Row i of S + alpha (A + I) S equals z_i X^T with z_i = (1 + alpha) x_i + alpha sum_{j in N(i)} x_j.
  Matrix z = x;
  if (opts.mode == SamplingMode::propagated) {
    z = (1.0 + opts.alpha) * x;
    for (Index i = 0; i < x.rows(); ++i) {
      for (NodeId j : graph.neighbors_of(static_cast<NodeId>(i))) z.row(i) += opts.alpha * x.row(j);
    }
    if (counter) counter->add(Phase::precompute, u64(graph.neighbors.size() + n) * u64(x.cols()));
  }
  AttentionSamples out(opts.k, n);
  const Index block = static_cast<Index>(std::max<std::size_t>(opts.block_rows, 1));
  Matrix rows;
  for (Index begin = 0; begin < static_cast<Index>(n); begin += block) {
    const Index count = std::min<Index>(block, static_cast<Index>(n) - begin);
    rows.resize(count, static_cast<Index>(n));
    rows.noalias() = z.middleRows(begin, count) * x.transpose();
    if (counter) counter->add(Phase::precompute, u64(count) * u64(n) * u64(x.cols()));
    for (Index r = 0; r < count; ++r) {
      const NodeId i = static_cast<NodeId>(begin + r);
      const auto ids = top_k_row({rows.row(r).data(), n}, out.per_node(), i);
      std::copy(ids.begin(), ids.end(), out.of(i).begin());
    }
  }
  return out;
}

void save_samples(const AttentionSamples& samples, const SamplesProvenance& prov, std::ostream& os) {
  io::write_header(os, "TGSM", kSamplesFormatVersion);
  io::write_u32(os, samples.k());
  io::write_u64(os, samples.num_nodes());
  io::write_u64(os, prov.seed);
  io::write_u32(os, prov.embed_dim);
  for (NodeId v = 0; v < samples.num_nodes(); ++v) {
    const auto ids = samples.of(v);
    io::write_u32(os, static_cast<std::uint32_t>(ids.size()));
    for (NodeId id : ids) io::write_u32(os, id);
  }
}

AttentionSamples load_samples(std::istream& is, SamplesProvenance* prov) {
  io::read_header(is, "TGSM", kSamplesFormatVersion);
  const std::uint32_t k = io::read_u32(is);
  const std::uint64_t n = io::read_u64(is);
  SamplesProvenance p;
  p.seed = io::read_u64(is);
  p.embed_dim = io::read_u32(is);
  if (n > (1ull << 31) || k == 0) throw ArtifactError("samples artifact header is implausible");
  AttentionSamples out(k, n);
  for (NodeId v = 0; v < n; ++v) {
    const std::uint32_t len = io::read_u32(is);
    if (len != out.per_node()) throw ArtifactError("samples artifact: node " + std::to_string(v) + " has " +
                                                   std::to_string(len) + " samples, expected " +
                                                   std::to_string(out.per_node()));
    for (auto& id : out.of(v)) id = io::read_u32(is);
  }
  try {
    out.validate();
  } catch (const ContractError& e) {
    throw ArtifactError(std::string("samples artifact: ") + e.what());
  }
  if (prov) *prov = p;
  return out;
}

void save_samples(const AttentionSamples& samples, const SamplesProvenance& prov, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArtifactError("cannot write " + path.string());
  save_samples(samples, prov, os);
}

AttentionSamples load_samples(const std::filesystem::path& path, SamplesProvenance* prov) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArtifactError("cannot read " + path.string());
  return load_samples(is, prov);
}

}  // namespace tgnn
