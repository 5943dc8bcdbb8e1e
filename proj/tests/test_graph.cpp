#include <doctest.h>

#include <Eigen/Dense>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace tgnn;
using tgnn::test::floyd_warshall;
using tgnn::test::dense_pagerank;
using tgnn::test::random_graph;

namespace {

// Repeatedly drop users/items below the thresholds over an explicit edge set.
std::set<std::pair<std::string, std::string>> kcore_oracle(std::set<std::pair<std::string, std::string>> edges,
                                                           std::size_t mu, std::size_t mi) {
  while (true) {
    std::map<std::string, std::size_t> du, di;
    for (const auto& [u, i] : edges) {
      ++du[u];
      ++di[i];
    }
    std::set<std::pair<std::string, std::string>> next;
    for (const auto& e : edges)
      if (du[e.first] >= mu && di[e.second] >= mi) next.insert(e);
    if (next == edges) return edges;
    edges = std::move(next);
  }
}

IngestResult ingest_text(const std::string& text, std::size_t mu = 1, std::size_t mi = 1) {
  std::istringstream in(text);
  return ingest(in, mu, mi);
}

}  // namespace

TEST_CASE("adjacency construction is symmetric, sorted and simple") {
  const std::pair<NodeId, NodeId> edges[] = {{2, 0}, {0, 2}, {1, 1}, {3, 1}, {0, 3}};
  const Adjacency g = Adjacency::from_edges(4, edges);
  CHECK(g.num_edges() == 3);
  CHECK(std::vector<NodeId>(g.neighbors_of(0).begin(), g.neighbors_of(0).end()) == std::vector<NodeId>{2, 3});
  CHECK(g.has_edge(1, 3));
  CHECK(g.has_edge(3, 1));
  CHECK_FALSE(g.has_edge(1, 1));
}

TEST_CASE("ingest minimal fixture") {
  const auto r = ingest_text("u1\ti1\t100\t5\n");
  CHECK(r.graph.num_nodes() == 2);
  CHECK(r.graph.num_edges() == 1);
}

TEST_CASE("ingest conventions") {
  const auto r = ingest_text(
      "# comment\n"
      "7\t30\t5\t4\n"
      "7\t30\t2\t3\n"   // duplicate keeps earliest timestamp
      "7\t10\t9\n"      // three-column variant
      "3\t10\t1\t0\n"   // rating 0 dropped
      "12\t10\t4\t1\n");
  CHECK(r.graph.num_users() == 2);
  CHECK(r.graph.num_items() == 2);
  CHECK(r.user_labels == std::vector<std::string>{"7", "12"});  // numeric order
  CHECK(r.item_labels == std::vector<std::string>{"10", "30"});
  const auto seqs = user_sequences(r.graph);
  CHECK(seqs[0].timestamps == std::vector<std::int64_t>{2, 9});
  CHECK(r.graph.is_item(seqs[0].items[0]));
  CHECK(seqs[0].items[0] == r.graph.item_node(1));
}

TEST_CASE("ingest errors") {
  try {
    ingest_text("a\tb\t1\t1\nbad line\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest_text("a\tb\tnotatime\n"), ParseError);
  try {
    ingest_text("a\tb\t1\t1\n", 2, 1);
    FAIL("expected EmptyDataError");
  } catch (const EmptyDataError& e) {
    CHECK(std::string(e.what()).find("empty after filtering") != std::string::npos);
  }
}

TEST_CASE("threshold filtering reaches the brute-force fixed point") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    std::ostringstream text;
    std::set<std::pair<std::string, std::string>> edges;
    for (int r = 0; r < 900; ++r) {
      const std::string u = "u" + std::to_string(rng() % 60), i = "i" + std::to_string(rng() % 80);
      text << u << '\t' << i << '\t' << r << "\t1\n";
      edges.insert({u, i});
    }
    const auto oracle = kcore_oracle(edges, 9, 6);
    REQUIRE_FALSE(oracle.empty());
    const auto res = ingest_text(text.str(), 9, 6);
    CHECK(oracle.size() < edges.size());
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& it : res.graph.interactions()) {
      got.insert({res.user_labels[it.user], res.item_labels[it.item]});
    }
    CHECK(got == oracle);
  }
}

TEST_CASE("ingest is idempotent through its own TSV") {
  std::ostringstream text;
  Rng rng(3);
  for (int r = 0; r < 300; ++r) text << rng() % 40 << '\t' << rng() % 50 << '\t' << rng() % 1000 << "\t1\n";
  const auto first = ingest_text(text.str(), 3, 2);
  std::ostringstream dumped;
  write_tsv(first.graph, dumped);
  const auto second = ingest_text(dumped.str(), 3, 2);
  CHECK(second.graph == first.graph);
}

TEST_CASE("chronological split") {
  std::vector<Interaction> rows;
  for (NodeId t = 0; t < 10; ++t) rows.push_back({0, t, 100 - static_cast<std::int64_t>(t)});
  rows.push_back({1, 3, 5});
  const auto g = InteractionGraph::from_interactions(2, 10, rows);
  const Split s = chronological_split(g, 0.2);
  // Latest timestamps are items 0 and 1.
  CHECK(s.test_items[0] == std::vector<NodeId>{g.item_node(1), g.item_node(0)});
  CHECK(s.train.neighbors(0).size() == 8);
  CHECK(s.test_items[1].empty());
  CHECK(s.train.neighbors(1).size() == 1);

  const auto rg = tgnn::test::random_interactions(40, 30, 1, 12, 9);
  const Split rs = chronological_split(rg, 0.2);
  for (NodeId u = 0; u < 40; ++u) {
    const auto train_ts = rs.train.user_timestamps(u);
    CHECK_FALSE(train_ts.empty());
    const auto all = rg.neighbors(u);
    const auto ts = rg.user_timestamps(u);
    for (NodeId item : rs.test_items[u]) {
      const auto pos = std::find(all.begin(), all.end(), item) - all.begin();
      for (auto t : train_ts) CHECK(ts[pos] >= t);
    }
  }
}

TEST_CASE("bfs hops") {
  const std::pair<NodeId, NodeId> path[] = {{0, 1}, {1, 2}};
  const Adjacency p = Adjacency::from_edges(3, path);
  const NodeId targets[] = {0, 1, 2};
  CHECK(bfs_hops(p, 0, targets, 6) == std::vector<std::uint32_t>{0, 1, 2});

  const std::pair<NodeId, NodeId> two[] = {{0, 1}, {2, 3}};
  const Adjacency d = Adjacency::from_edges(4, two);
  const NodeId far[] = {3};
  CHECK(bfs_hops(d, 0, far, 6) == std::vector<std::uint32_t>{7});
  const NodeId bad[] = {9};
  CHECK_THROWS_AS(bfs_hops(d, 0, bad, 6), std::out_of_range);
  CHECK_THROWS_AS(bfs_hops(d, 9, far, 6), std::out_of_range);
}

TEST_CASE("bfs equals Floyd-Warshall and satisfies the triangle inequality") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Adjacency g = random_graph(100, 0.025, seed);
    const auto oracle = floyd_warshall(g, 6);
    std::vector<std::vector<std::uint32_t>> got;
    for (NodeId c = 0; c < 100; ++c) got.push_back(bfs_all(g, c, 6));
    CHECK(got == oracle);
    for (NodeId a = 0; a < 100; a += 7)
      for (NodeId b = 0; b < 100; b += 5)
        for (NodeId c = 0; c < 100; c += 3)
          if (got[a][b] <= 6 && got[b][c] <= 6 && got[a][c] <= 6) CHECK(got[a][c] <= got[a][b] + got[b][c]);
  }
}

TEST_CASE("pagerank") {
  const std::pair<NodeId, NodeId> one[] = {{0, 1}};
  const auto two = pagerank(Adjacency::from_edges(2, one));
  CHECK(std::abs(two.values[0] - 0.5) < 1e-12);
  CHECK(std::abs(two.values[1] - 0.5) < 1e-12);
  CHECK(pagerank(Adjacency::from_edges(1, {})).values == std::vector<double>{1.0});

  const std::pair<NodeId, NodeId> star[] = {{0, 1}, {0, 2}, {0, 3}};
  const Adjacency s = Adjacency::from_edges(4, star);
  const auto pr = pagerank(s);
  const auto oracle = dense_pagerank(s, 0.85);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(pr.values[i] - oracle[i]) < 1e-6);
  CHECK(pr.converged);
}

TEST_CASE("pagerank matches a dense solve and is label invariant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 20 + 18 * seed;
    const Adjacency g = random_graph(n, 3.0 / n, seed + 100);
    const auto pr = pagerank(g);
    const auto oracle = dense_pagerank(g, 0.85);
    double total = 0.0, worst = 0.0, least = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += pr.values[i];
      least = std::min(least, pr.values[i]);
      worst = std::max(worst, std::abs(pr.values[i] - oracle[i]));
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
    CHECK(least > 0.0);
    CHECK(worst < 1e-6);

    // Relabel v -> n-1-v.
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId v = 0; v < n; ++v)
      for (NodeId u : g.neighbors_of(v)) edges.emplace_back(NodeId(n - 1 - v), NodeId(n - 1 - u));
    const auto relabeled = pagerank(Adjacency::from_edges(n, edges));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(relabeled.values[n - 1 - i] - pr.values[i]) < 1e-12);
  }
}

TEST_CASE("degrees") {
  const std::pair<NodeId, NodeId> star[] = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}};
  const auto deg = degrees(Adjacency::from_edges(7, star));
  CHECK(deg[0] == 5);
  CHECK(deg[6] == 0);
  const Adjacency g = random_graph(60, 0.1, 5);
  const auto d = degrees(g);
  CHECK(std::accumulate(d.begin(), d.end(), std::size_t{0}) == 2 * g.num_edges());
}

TEST_CASE("graph artifact round trip and version check") {
  const auto g = tgnn::test::random_interactions(15, 12, 2, 6, 4);
  std::stringstream buf;
  save_graph(g, buf);
  CHECK(load_graph(buf) == g);

  std::string bytes;
  {
    std::ostringstream os;
    save_graph(g, os);
    bytes = os.str();
  }
  bytes[4] = 9;
  std::istringstream bad(bytes);
  try {
    load_graph(bad);
    FAIL("expected ArtifactError");
  } catch (const ArtifactError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
  std::istringstream truncated(bytes.substr(0, 20));
  CHECK_THROWS_AS(load_graph(truncated), ArtifactError);
}
