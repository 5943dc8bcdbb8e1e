#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tgnn/errors.hpp"

namespace tgnn {

using NodeId = std::uint32_t;

/// Undirected adjacency in CSR form. Neighbor lists are sorted ascending and
/// free of duplicates and self loops.
struct Adjacency {
  std::vector<std::uint64_t> offsets{0};
  std::vector<NodeId> neighbors;

  std::size_t num_nodes() const { return offsets.size() - 1; }
  /// Undirected edge count.
  std::size_t num_edges() const { return neighbors.size() / 2; }
  std::span<const NodeId> neighbors_of(NodeId v) const {
    return {neighbors.data() + offsets[v], static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
  std::size_t degree(NodeId v) const { return static_cast<std::size_t>(offsets[v + 1] - offsets[v]); }
  bool has_edge(NodeId a, NodeId b) const;

  /// Symmetrizes, sorts and deduplicates; self loops are dropped.
  static Adjacency from_edges(std::size_t num_nodes, std::span<const std::pair<NodeId, NodeId>> edges);

  bool operator==(const Adjacency&) const = default;
};

/// One implicit-feedback interaction; `item` is the item index in [0, J).
struct Interaction {
  NodeId user = 0;
  NodeId item = 0;
  std::int64_t timestamp = 0;
};

/// Bipartite user-item graph over unified node ids: users 0..I-1, items I..N-1.
class InteractionGraph {
 public:
  InteractionGraph() = default;

  /// Builds the graph; duplicate (user, item) pairs keep the earliest timestamp.
  static InteractionGraph from_interactions(std::size_t num_users, std::size_t num_items,
                                            std::span<const Interaction> interactions);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t num_nodes() const { return num_users_ + num_items_; }
  std::size_t num_edges() const { return adjacency_.num_edges(); }

  bool is_user(NodeId v) const { return v < num_users_; }
  bool is_item(NodeId v) const { return v >= num_users_ && v < num_nodes(); }
  NodeId item_node(std::size_t item) const { return static_cast<NodeId>(num_users_ + item); }

  const Adjacency& adjacency() const { return adjacency_; }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.neighbors_of(v); }
  /// Timestamps aligned with neighbors(user) for a user node.
  std::span<const std::int64_t> user_timestamps(NodeId user) const;

  std::vector<Interaction> interactions() const;

  bool operator==(const InteractionGraph& other) const = default;

 private:
  std::size_t num_users_ = 0;
  std::size_t num_items_ = 0;
  Adjacency adjacency_;
  std::vector<std::int64_t> timestamps_;  // one per interaction, user-side CSR order
};

/// A user's items ordered by (timestamp, node id).
struct UserSequence {
  NodeId user = 0;
  std::vector<NodeId> items;
  std::vector<std::int64_t> timestamps;
};

std::vector<UserSequence> user_sequences(const InteractionGraph& graph);

struct IngestResult {
  InteractionGraph graph;
  std::vector<UserSequence> sequences;
  std::vector<std::string> user_labels;  // original id per dense user index
  std::vector<std::string> item_labels;
};

/// Parses `user item timestamp [rating]` lines (tab or space separated, `#` comments),
/// keeps rows with rating > 0 (or no rating column), then repeatedly drops users
/// and items below the thresholds until nothing changes. Surviving ids are
/// densely re-indexed in ascending id order (numeric when every id is an integer).
IngestResult ingest(std::istream& in, std::size_t min_user_interactions, std::size_t min_item_interactions);
IngestResult ingest_file(const std::filesystem::path& path, std::size_t min_user_interactions,
                         std::size_t min_item_interactions);

/// Writes the graph back as `user item timestamp 1` lines with dense ids.
void write_tsv(const InteractionGraph& graph, std::ostream& out);

struct Split {
  InteractionGraph train;
  std::vector<std::vector<NodeId>> test_items;  // indexed by user, item node ids
};

/// Per user, the last ceil(fraction * len) items become test positives. Users
/// with fewer than two interactions stay in train; every user keeps at least one
/// train item.
Split chronological_split(const InteractionGraph& graph, double holdout_fraction);
/// Holds out each user's most recent item (users with at least two items).
Split holdout_last_item(const InteractionGraph& graph);

/// Exact shortest hop counts from `center` to each target; targets farther
/// than `cap` (or unreachable) get `cap + 1`.
std::vector<std::uint32_t> bfs_hops(const Adjacency& graph, NodeId center, std::span<const NodeId> targets,
                                    std::uint32_t cap);
/// Capped hop count to every node.
std::vector<std::uint32_t> bfs_all(const Adjacency& graph, NodeId center, std::uint32_t cap);

struct PageRankResult {
  std::vector<double> values;
  bool converged = false;
  int iterations = 0;
  double last_change = 0.0;
};

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
PageRankResult pagerank(const Adjacency& graph, double damping = 0.85, double tol = 1e-10, int max_iter = 200);

std::vector<std::uint32_t> degrees(const Adjacency& graph);

// Binary graph artifact: "TGNN", version u8, I, J, E (u64), CSR offsets (u64),
// neighbors (u32), per-interaction timestamps (i64), all little-endian.
inline constexpr std::uint8_t kGraphFormatVersion = 1;
void save_graph(const InteractionGraph& graph, std::ostream& os);
InteractionGraph load_graph(std::istream& is);
void save_graph(const InteractionGraph& graph, const std::filesystem::path& path);
InteractionGraph load_graph(const std::filesystem::path& path);

}  // namespace tgnn
