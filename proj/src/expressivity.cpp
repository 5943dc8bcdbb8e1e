#include "tgnn/expressivity.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <string>

#include "tgnn/layers.hpp"

namespace tgnn {

ReductionCheck gnn_reduction_check(Index dim, double tolerance, std::uint64_t seed, double perturbation) {
  if (dim < 1) throw ContractError("gnn_reduction_check: dimension must be positive");
  constexpr std::size_t kNodes = 10;
  Rng rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::bernoulli_distribution coin(0.3);
  for (NodeId a = 0; a < kNodes; ++a) {
    for (NodeId b = a + 1; b < kNodes; ++b) {
      if (coin(rng)) edges.emplace_back(a, b);
    }
  }
  const Adjacency graph = Adjacency::from_edges(kNodes, edges);
  Matrix adjacency = Matrix::Zero(kNodes, kNodes);
  for (NodeId v = 0; v < kNodes; ++v) {
    for (NodeId u : graph.neighbors_of(v)) adjacency(v, u) = 1.0;
  }
  const Matrix h = uniform_matrix(kNodes, dim, -1.0, 1.0, rng);
  const Matrix w = uniform_matrix(dim, dim, -1.0, 1.0, rng);
  const double root = std::sqrt(static_cast<double>(dim));

  Tape tape;
  AttentionWeights<Var> attn;
  attn.wq.push_back(tape.constant(uniform_matrix(dim, dim, -1.0, 1.0, rng)));
  attn.wk.push_back(tape.constant(uniform_matrix(dim, dim, -1.0, 1.0, rng)));
  attn.wv.push_back(tape.constant(Matrix::Identity(dim, dim) * (root - 1.0 + perturbation)));
  attn.wm = tape.constant(Matrix::Identity(dim, dim));
  Var hv = tape.constant(h);
  AttentionOptions opts;
  opts.residual = false;
  // Top-1 self mask: every node's only key/value row is itself.
  const Matrix attended = transformer_layer(attn, hv, hv, 1, opts).value();
  const Matrix h_out = (attended + h) / root;

  const Matrix via_transformer = (adjacency * h_out * w).cwiseMax(0.0);
  const Matrix plain = (adjacency * h * w).cwiseMax(0.0);
  ReductionCheck result;
  result.max_deviation = (via_transformer - plain).cwiseAbs().maxCoeff();
  result.passed = result.max_deviation < tolerance;
  return result;
}

std::vector<std::vector<std::uint64_t>> wl_refine(const std::vector<const Adjacency*>& graphs, int* rounds) {
  std::vector<std::vector<std::uint64_t>> colors;
  for (const Adjacency* g : graphs) colors.emplace_back(g->num_nodes(), 0);
  auto count_classes = [&] {
    std::vector<std::uint64_t> all;
    for (const auto& c : colors) all.insert(all.end(), c.begin(), c.end());
    std::sort(all.begin(), all.end());
    return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
  };
  std::size_t classes = count_classes();
  int r = 0;
  while (true) {
    std::map<std::pair<std::uint64_t, std::vector<std::uint64_t>>, std::uint64_t> palette;
    std::vector<std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>>> signatures(graphs.size());
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
      const Adjacency& g = *graphs[gi];
      for (NodeId v = 0; v < g.num_nodes(); ++v) {
        std::vector<std::uint64_t> nb;
        for (NodeId u : g.neighbors_of(v)) nb.push_back(colors[gi][u]);
        std::sort(nb.begin(), nb.end());
        signatures[gi].emplace_back(colors[gi][v], std::move(nb));
        palette.emplace(signatures[gi].back(), 0);
      }
    }
    std::uint64_t next = 0;
    for (auto& [sig, id] : palette) id = next++;
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
      for (std::size_t v = 0; v < signatures[gi].size(); ++v) colors[gi][v] = palette.at(signatures[gi][v]);
    }
    ++r;
    const std::size_t refined = count_classes();
    if (refined == classes) break;
    classes = refined;
  }
  if (rounds) *rounds = r;
  return colors;
}

namespace {

std::vector<std::vector<std::uint32_t>> hop_multisets(const Adjacency& g, std::uint32_t cap) {
  std::vector<std::vector<std::uint32_t>> out;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    auto hops = bfs_all(g, v, cap);
    std::sort(hops.begin(), hops.end());
    out.push_back(std::move(hops));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

WlReport wl_distinguish_check(const Adjacency& a, const Adjacency& b, std::uint32_t cap) {
  WlReport report;
  const auto colors = wl_refine({&a, &b}, &report.rounds);
  for (auto c : colors[0]) ++report.histogram_a[c];
  for (auto c : colors[1]) ++report.histogram_b[c];
  report.wl_equal = report.histogram_a == report.histogram_b;
  report.hops_a = hop_multisets(a, cap);
  report.hops_b = hop_multisets(b, cap);
  report.hops_differ = report.hops_a != report.hops_b;
  return report;
}

std::pair<Adjacency, Adjacency> builtin_wl_pair() {
  std::vector<std::pair<NodeId, NodeId>> cycle, triangles;
  for (NodeId v = 0; v < 6; ++v) cycle.emplace_back(v, (v + 1) % 6);
  for (NodeId base : {0u, 3u}) {
    for (NodeId v = 0; v < 3; ++v) triangles.emplace_back(base + v, base + (v + 1) % 3);
  }
  return {Adjacency::from_edges(6, cycle), Adjacency::from_edges(6, triangles)};
}

std::pair<Adjacency, Adjacency> parse_graph_pair(std::istream& in) {
  std::vector<std::pair<NodeId, NodeId>> edges[2];
  std::size_t declared[2] = {0, 0};
  int current = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line.compare(first, 3, "---") == 0) {
      if (++current > 1) throw ParseError("graph pair: more than two graphs (line " + std::to_string(line_no) + ")");
      continue;
    }
    std::istringstream ls(line);
    std::string a;
    ls >> a;
    if (a == "nodes") {
      std::size_t n = 0;
      if (!(ls >> n)) throw ParseError("graph pair: bad nodes line " + std::to_string(line_no));
      declared[current] = n;
      continue;
    }
    long long u = 0, v = 0;
    std::istringstream es(line);
    if (!(es >> u >> v) || u < 0 || v < 0) throw ParseError("graph pair: bad edge on line " + std::to_string(line_no));
    edges[current].emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  if (current != 1) throw ParseError("graph pair: expected two graphs separated by ---");
  Adjacency out[2];
  for (int g = 0; g < 2; ++g) {
    std::size_t n = declared[g];
    for (auto [u, v] : edges[g]) n = std::max<std::size_t>(n, std::max(u, v) + 1);
    out[g] = Adjacency::from_edges(n, edges[g]);
  }
  return {std::move(out[0]), std::move(out[1])};
}

}  // namespace tgnn
