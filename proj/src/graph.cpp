#include "tgnn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "tgnn/binary_io.hpp"

namespace tgnn {

bool Adjacency::has_edge(NodeId a, NodeId b) const {
  const auto nb = neighbors_of(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

Adjacency Adjacency::from_edges(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges) {
  std::vector<std::vector<NodeId>> lists(num_nodes);
  for (auto [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) {
      throw ContractError("Adjacency::from_edges: edge (" + std::to_string(a) + ", " + std::to_string(b) +
                          ") outside " + std::to_string(num_nodes) + " nodes");
    }
    if (a == b) continue;
    lists[a].push_back(b);
    lists[b].push_back(a);
  }
  Adjacency adj;
  adj.offsets.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    auto& l = lists[v];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    adj.offsets[v + 1] = adj.offsets[v] + l.size();
  }
  adj.neighbors.reserve(adj.offsets.back());
  for (auto& l : lists) adj.neighbors.insert(adj.neighbors.end(), l.begin(), l.end());
  return adj;
}

InteractionGraph InteractionGraph::from_interactions(std::size_t num_users, std::size_t num_items,
                                                     std::span<const Interaction> interactions) {
  std::vector<Interaction> rows(interactions.begin(), interactions.end());
  for (const auto& r : rows) {
    if (r.user >= num_users || r.item >= num_items) {
      throw ContractError("InteractionGraph: interaction (" + std::to_string(r.user) + ", " + std::to_string(r.item) +
                          ") outside " + std::to_string(num_users) + " users x " + std::to_string(num_items) +
                          " items");
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Interaction& a, const Interaction& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.item != b.item) return a.item < b.item;
    return a.timestamp < b.timestamp;
  });
  rows.erase(std::unique(rows.begin(), rows.end(),
                         [](const Interaction& a, const Interaction& b) { return a.user == b.user && a.item == b.item; }),
             rows.end());

  InteractionGraph g;
  g.num_users_ = num_users;
  g.num_items_ = num_items;
  const std::size_t n = num_users + num_items;
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(rows.size());
  for (const auto& r : rows) edges.emplace_back(r.user, static_cast<NodeId>(num_users + r.item));
  g.adjacency_ = Adjacency::from_edges(n, edges);
  // rows are sorted by (user, item), matching the user-side neighbor order.
  g.timestamps_.reserve(rows.size());
  for (const auto& r : rows) g.timestamps_.push_back(r.timestamp);
  return g;
}

std::span<const std::int64_t> InteractionGraph::user_timestamps(NodeId user) const {
  if (!is_user(user)) throw ContractError("user_timestamps: node " + std::to_string(user) + " is not a user");
  const auto begin = adjacency_.offsets[user];
  return {timestamps_.data() + begin, static_cast<std::size_t>(adjacency_.offsets[user + 1] - begin)};
}

std::vector<Interaction> InteractionGraph::interactions() const {
  std::vector<Interaction> out;
  out.reserve(timestamps_.size());
  for (NodeId u = 0; u < num_users_; ++u) {
    const auto nb = neighbors(u);
    const auto ts = user_timestamps(u);
    for (std::size_t p = 0; p < nb.size(); ++p) {
      out.push_back({u, static_cast<NodeId>(nb[p] - num_users_), ts[p]});
    }
  }
  return out;
}

std::vector<UserSequence> user_sequences(const InteractionGraph& graph) {
  std::vector<UserSequence> out(graph.num_users());
  for (NodeId u = 0; u < graph.num_users(); ++u) {
    const auto nb = graph.neighbors(u);
    const auto ts = graph.user_timestamps(u);
    std::vector<std::size_t> order(nb.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ts[a] != ts[b] ? ts[a] < ts[b] : nb[a] < nb[b];
    });
    out[u].user = u;
    for (std::size_t i : order) {
      out[u].items.push_back(nb[i]);
      out[u].timestamps.push_back(ts[i]);
    }
  }
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != '\t' && line[j] != ' ' && line[j] != '\r') ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

/// Ascending id order; numeric when every label is an integer.
std::vector<std::size_t> label_order(const std::vector<std::string>& labels) {
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::int64_t> numeric(labels.size());
  bool all_numeric = true;
  for (std::size_t i = 0; i < labels.size() && all_numeric; ++i) all_numeric = parse_int64(labels[i], numeric[i]);
  if (all_numeric) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return numeric[a] < numeric[b]; });
  } else {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });
  }
  return order;
}

}  // namespace

IngestResult ingest(std::istream& in, std::size_t min_user_interactions, std::size_t min_item_interactions) {
  std::unordered_map<std::string, NodeId> user_index, item_index;
  std::vector<std::string> user_raw, item_raw;
  std::map<std::pair<NodeId, NodeId>, std::int64_t> earliest;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    const auto first = view.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || view[first] == '#') continue;
    const auto fields = split_fields(view);
    if (fields.size() != 3 && fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 or 4 fields, found " +
                       std::to_string(fields.size()));
    }
    std::int64_t ts = 0;
    if (!parse_int64(fields[2], ts)) {
      double t = 0.0;
      if (!parse_double(fields[2], t)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad timestamp '" + std::string(fields[2]) + "'");
      }
      ts = static_cast<std::int64_t>(std::floor(t));
    }
    if (fields.size() == 4) {
      double rating = 0.0;
      if (!parse_double(fields[3], rating)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad rating '" + std::string(fields[3]) + "'");
      }
      if (!(rating > 0.0)) continue;
    }
    auto intern = [](std::unordered_map<std::string, NodeId>& index, std::vector<std::string>& raw,
                     std::string_view key) {
      auto [it, inserted] = index.try_emplace(std::string(key), static_cast<NodeId>(raw.size()));
      if (inserted) raw.emplace_back(key);
      return it->second;
    };
    const NodeId u = intern(user_index, user_raw, fields[0]);
    const NodeId i = intern(item_index, item_raw, fields[1]);
    auto [it, inserted] = earliest.try_emplace({u, i}, ts);
    if (!inserted) it->second = std::min(it->second, ts);
  }

  // Alternate user/item threshold filters until a fixed point.
  std::vector<bool> user_alive(user_raw.size(), true), item_alive(item_raw.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<std::size_t> ucount(user_raw.size(), 0), icount(item_raw.size(), 0);
    for (const auto& [key, ts] : earliest) {
      if (user_alive[key.first] && item_alive[key.second]) {
        ++ucount[key.first];
        ++icount[key.second];
      }
    }
    for (std::size_t u = 0; u < user_raw.size(); ++u) {
      if (user_alive[u] && ucount[u] < std::max<std::size_t>(min_user_interactions, 1)) {
        user_alive[u] = false;
        changed = true;
      }
    }
    for (std::size_t i = 0; i < item_raw.size(); ++i) {
      if (item_alive[i] && icount[i] < std::max<std::size_t>(min_item_interactions, 1)) {
        item_alive[i] = false;
        changed = true;
      }
    }
  }

  IngestResult result;
  std::vector<NodeId> user_dense(user_raw.size(), 0), item_dense(item_raw.size(), 0);
  for (std::size_t u : label_order(user_raw)) {
    if (!user_alive[u]) continue;
    user_dense[u] = static_cast<NodeId>(result.user_labels.size());
    result.user_labels.push_back(user_raw[u]);
  }
  for (std::size_t i : label_order(item_raw)) {
    if (!item_alive[i]) continue;
    item_dense[i] = static_cast<NodeId>(result.item_labels.size());
    result.item_labels.push_back(item_raw[i]);
  }
  std::vector<Interaction> rows;
  for (const auto& [key, ts] : earliest) {
    if (user_alive[key.first] && item_alive[key.second]) {
      rows.push_back({user_dense[key.first], item_dense[key.second], ts});
    }
  }
  if (rows.empty()) throw EmptyDataError("empty after filtering: no interactions survive the thresholds");
  result.graph = InteractionGraph::from_interactions(result.user_labels.size(), result.item_labels.size(), rows);
  result.sequences = user_sequences(result.graph);
  return result;
}

IngestResult ingest_file(const std::filesystem::path& path, std::size_t min_user_interactions,
                         std::size_t min_item_interactions) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return ingest(in, min_user_interactions, min_item_interactions);
}

void write_tsv(const InteractionGraph& graph, std::ostream& out) {
  for (const auto& r : graph.interactions()) out << r.user << '\t' << r.item << '\t' << r.timestamp << "\t1\n";
}

namespace {

template <typename CountFn>
Split split_by(const InteractionGraph& graph, CountFn test_count) {
  Split split;
  split.test_items.resize(graph.num_users());
  std::vector<Interaction> train;
  for (const auto& seq : user_sequences(graph)) {
    const std::size_t len = seq.items.size();
    const std::size_t n_test = len < 2 ? 0 : std::min(len - 1, test_count(len));
    const std::size_t n_train = len - n_test;
    for (std::size_t p = 0; p < len; ++p) {
      const NodeId item = seq.items[p];
      if (p < n_train) {
        train.push_back({seq.user, static_cast<NodeId>(item - graph.num_users()), seq.timestamps[p]});
      } else {
        split.test_items[seq.user].push_back(item);
      }
    }
  }
  split.train = InteractionGraph::from_interactions(graph.num_users(), graph.num_items(), train);
  return split;
}

}  // namespace

Split chronological_split(const InteractionGraph& graph, double holdout_fraction) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
    throw ContractError("chronological_split: holdout fraction must be in (0, 1)");
  }
  return split_by(graph, [holdout_fraction](std::size_t len) {
    // The epsilon absorbs representation error, e.g. 0.1 * 30 = 3.0000000000000004.
    return static_cast<std::size_t>(std::ceil(holdout_fraction * static_cast<double>(len) - 1e-9));
  });
}

Split holdout_last_item(const InteractionGraph& graph) {
  return split_by(graph, [](std::size_t) { return std::size_t{1}; });
}

std::vector<std::uint32_t> bfs_all(const Adjacency& graph, NodeId center, std::uint32_t cap) {
  if (center >= graph.num_nodes()) throw std::out_of_range("bfs: unknown node " + std::to_string(center));
  if (cap < 1) throw ContractError("bfs: cap must be at least 1");
  std::vector<std::uint32_t> hops(graph.num_nodes(), cap + 1);
  hops[center] = 0;
  std::vector<NodeId> frontier{center}, next;
  for (std::uint32_t depth = 1; depth <= cap && !frontier.empty(); ++depth) {
    next.clear();
    for (NodeId v : frontier) {
      for (NodeId w : graph.neighbors_of(v)) {
        if (hops[w] > depth) {
          hops[w] = depth;
          next.push_back(w);
        }
      }
    }
    frontier.swap(next);
  }
  return hops;
}

std::vector<std::uint32_t> bfs_hops(const Adjacency& graph, NodeId center, std::span<const NodeId> targets,
                                    std::uint32_t cap) {
  if (center >= graph.num_nodes()) throw std::out_of_range("bfs_hops: unknown node " + std::to_string(center));
  if (cap < 1) throw ContractError("bfs_hops: cap must be at least 1");
  for (NodeId t : targets) {
    if (t >= graph.num_nodes()) throw std::out_of_range("bfs_hops: unknown node " + std::to_string(t));
  }
  std::size_t pending = 0;
  std::vector<char> wanted(graph.num_nodes(), 0);
  for (NodeId t : targets) {
    if (!wanted[t]) {
      wanted[t] = 1;
      ++pending;
    }
  }
  std::vector<std::uint32_t> dist(graph.num_nodes(), cap + 1);
  dist[center] = 0;
  if (wanted[center]) --pending;
  std::vector<NodeId> frontier{center}, next;
  // Stops as soon as every target is settled.
  for (std::uint32_t depth = 1; depth <= cap && !frontier.empty() && pending > 0; ++depth) {
    next.clear();
    for (NodeId v : frontier) {
      for (NodeId w : graph.neighbors_of(v)) {
        if (dist[w] > depth) {
          dist[w] = depth;
          next.push_back(w);
          if (wanted[w]) --pending;
        }
      }
    }
    frontier.swap(next);
  }
  std::vector<std::uint32_t> out;
  out.reserve(targets.size());
  for (NodeId t : targets) out.push_back(dist[t]);
  return out;
}

PageRankResult pagerank(const Adjacency& graph, double damping, double tol, int max_iter) {
  if (!(damping > 0.0 && damping < 1.0)) throw ContractError("pagerank: damping must be in (0, 1)");
  const std::size_t n = graph.num_nodes();
  PageRankResult result;
  if (n == 0) {
    result.converged = true;
    return result;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n);
  for (int it = 0; it < max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (graph.degree(static_cast<NodeId>(v)) == 0) dangling += rank[v];
    }
    const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (std::size_t v = 0; v < n; ++v) {
      const auto nb = graph.neighbors_of(static_cast<NodeId>(v));
      if (nb.empty()) continue;
      const double share = damping * rank[v] / static_cast<double>(nb.size());
      for (NodeId w : nb) next[w] += share;
    }
    double change = 0.0, total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      change += std::abs(next[v] - rank[v]);
      total += next[v];
    }
    for (double& x : next) x /= total;
    rank.swap(next);
    result.iterations = it + 1;
    result.last_change = change;
    if (change < tol) {
      result.converged = true;
      break;
    }
  }
  result.values = std::move(rank);
  return result;
}

std::vector<std::uint32_t> degrees(const Adjacency& graph) {
  std::vector<std::uint32_t> out(graph.num_nodes());
  for (std::size_t v = 0; v < out.size(); ++v) out[v] = static_cast<std::uint32_t>(graph.degree(static_cast<NodeId>(v)));
  return out;
}

void save_graph(const InteractionGraph& graph, std::ostream& os) {
  io::write_header(os, "TGNN", kGraphFormatVersion);
  io::write_u64(os, graph.num_users());
  io::write_u64(os, graph.num_items());
  io::write_u64(os, graph.num_edges());
  const Adjacency& adj = graph.adjacency();
  for (auto off : adj.offsets) io::write_u64(os, off);
  for (auto v : adj.neighbors) io::write_u32(os, v);
  for (const auto& r : graph.interactions()) io::write_i64(os, r.timestamp);
}

InteractionGraph load_graph(std::istream& is) {
  io::read_header(is, "TGNN", kGraphFormatVersion);
  const std::uint64_t users = io::read_u64(is);
  const std::uint64_t items = io::read_u64(is);
  const std::uint64_t edges = io::read_u64(is);
  const std::uint64_t n = users + items;
  if (n > (1ull << 31) || edges > (1ull << 40)) throw ArtifactError("graph artifact header is implausible");
  Adjacency adj;
  adj.offsets.resize(n + 1);
  for (auto& off : adj.offsets) off = io::read_u64(is);
  if (adj.offsets.front() != 0 || adj.offsets.back() != 2 * edges) {
    throw ArtifactError("graph artifact CSR offsets are inconsistent");
  }
  adj.neighbors.resize(2 * edges);
  for (auto& v : adj.neighbors) v = io::read_u32(is);
  std::vector<Interaction> rows;
  rows.reserve(edges);
  for (NodeId u = 0; u < users; ++u) {
    for (auto p = adj.offsets[u]; p < adj.offsets[u + 1]; ++p) {
      const NodeId item = adj.neighbors[p];
      if (item < users || item >= n) throw ArtifactError("graph artifact has a non-bipartite edge");
      rows.push_back({u, static_cast<NodeId>(item - users), 0});
    }
  }
  if (rows.size() != edges) throw ArtifactError("graph artifact edge count mismatch");
  for (auto& r : rows) r.timestamp = io::read_i64(is);
  InteractionGraph g = InteractionGraph::from_interactions(users, items, rows);
  if (g.adjacency().offsets != adj.offsets || g.adjacency().neighbors != adj.neighbors) {
    throw ArtifactError("graph artifact adjacency is not symmetric and sorted");
  }
  return g;
}

void save_graph(const InteractionGraph& graph, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArtifactError("cannot write " + path.string());
  save_graph(graph, os);
}

InteractionGraph load_graph(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArtifactError("cannot read " + path.string());
  return load_graph(is);
}

}  // namespace tgnn
