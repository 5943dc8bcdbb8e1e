#pragma once

#include <functional>
#include <vector>

#include "tgnn/gradcheck.hpp"
#include "tgnn/graph.hpp"
#include "tgnn/tape.hpp"

namespace tgnn::test {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  return uniform_matrix(rows, cols, lo, hi, rng);
}

/// Erdos-Renyi graph on n nodes.
inline Adjacency random_graph(std::size_t n, double p, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution edge(p);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (edge(rng)) edges.emplace_back(a, b);
  return Adjacency::from_edges(n, edges);
}

/// Random bipartite interaction graph where every user has at least
/// `min_items` distinct items.
inline InteractionGraph random_interactions(std::size_t users, std::size_t items, std::size_t min_items,
                                            std::size_t max_items, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Interaction> rows;
  for (NodeId u = 0; u < users; ++u) {
    const std::size_t len = min_items + rng() % (max_items - min_items + 1);
    std::vector<NodeId> pool(items);
    for (NodeId j = 0; j < items; ++j) pool[j] = j;
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t t = 0; t < len; ++t) rows.push_back({u, pool[t], static_cast<std::int64_t>(1000 * u + t)});
  }
  return InteractionGraph::from_interactions(users, items, rows);
}

/// Worst relative error between tape gradients and central differences for a
/// scalar function of `inputs`.
inline double op_gradient_error(std::vector<Matrix> inputs,
                                const std::function<Var(Tape&, const std::vector<Var>&)>& fn, double h = 1e-5) {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& m : inputs) vars.push_back(tape.leaf(m));
  tape.backward(fn(tape, vars));
  std::vector<Matrix> analytic;
  for (const auto& v : vars) analytic.push_back(v.grad());
  std::vector<Matrix*> ptrs;
  for (auto& m : inputs) ptrs.push_back(&m);
  auto loss = [&] {
    Tape t;
    std::vector<Var> vs;
    for (const auto& m : inputs) vs.push_back(t.constant(m));
    return fn(t, vs).value()(0, 0);
  };
  return finite_difference_check(ptrs, analytic, loss, h).max_relative_error;
}

/// Fixed random projection to a scalar so vector-valued ops can be checked.
inline Var project(Tape& t, Var x, std::uint64_t seed = 99) {
  return sum(row_dot(x, t.constant(random_matrix(x.rows(), x.cols(), seed))));
}

}  // namespace tgnn::test
