#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "tgnn/layers.hpp"
#include "tgnn/metrics.hpp"

// Independent reference implementations shared by the unit tests and the
// acceptance binary.
namespace tgnn::test {

// Full stable sort of one row: descending value, ascending id, self removed.
inline std::vector<NodeId> sort_oracle(const Matrix& s, NodeId self, std::size_t count) {
  std::vector<NodeId> ids;
  for (NodeId j = 0; j < s.cols(); ++j)
    if (j != self) ids.push_back(j);
  std::stable_sort(ids.begin(), ids.end(), [&](NodeId a, NodeId b) { return s(self, a) > s(self, b); });
  ids.resize(std::min(count, ids.size()));
  return ids;
}

inline Matrix dense_adjacency(const Adjacency& g) {
  Matrix a = Matrix::Zero(g.num_nodes(), g.num_nodes());
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    for (NodeId u : g.neighbors_of(v)) a(v, u) = 1.0;
  return a;
}

inline std::vector<std::vector<std::uint32_t>> floyd_warshall(const Adjacency& g, std::uint32_t cap) {
  const std::size_t n = g.num_nodes();
  const std::uint32_t inf = 1u << 20;
  std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, inf));
  for (NodeId v = 0; v < n; ++v) {
    d[v][v] = 0;
    for (NodeId u : g.neighbors_of(v)) d[v][u] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  for (auto& row : d)
    for (auto& x : row) x = std::min(x, cap + 1);
  return d;
}

inline std::vector<double> dense_pagerank(const Adjacency& g, double damping) {
  const Index n = static_cast<Index>(g.num_nodes());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (NodeId j = 0; j < g.num_nodes(); ++j) {
    const auto nb = g.neighbors_of(j);
    if (nb.empty()) {
      m.col(j).setConstant(1.0 / n);
    } else {
      for (NodeId i : nb) m(i, j) = 1.0 / nb.size();
    }
  }
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - damping * m;
  Eigen::VectorXd rhs = Eigen::VectorXd::Constant(n, (1.0 - damping) / n);
  Eigen::VectorXd x = lhs.partialPivLu().solve(rhs);
  return {x.data(), x.data() + n};
}

// softmax(q K^T / sqrt(d_head)) V per head, heads concatenated, times W_m, plus h.
inline RowVector attention_oracle(const AttentionWeights<Matrix>& w, const RowVector& h, const Matrix& smp) {
  const Index dh = w.wq[0].cols();
  RowVector cat(dh * static_cast<Index>(w.wq.size()));
  for (std::size_t head = 0; head < w.wq.size(); ++head) {
    const RowVector q = h * w.wq[head];
    const Matrix k = smp * w.wk[head];
    const Matrix v = smp * w.wv[head];
    std::vector<double> logits(smp.rows());
    for (Index r = 0; r < smp.rows(); ++r) logits[r] = q.dot(k.row(r)) / std::sqrt(static_cast<double>(dh));
    const double peak = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) z += (l = std::exp(l - peak));
    RowVector acc = RowVector::Zero(dh);
    for (Index r = 0; r < smp.rows(); ++r) acc += (logits[r] / z) * v.row(r);
    cat.segment(static_cast<Index>(head) * dh, dh) = acc;
  }
  return h + cat * w.wm;
}

// Sort every non-train item by (score desc, id asc) and score the top N.
inline RankingMetrics rerank_oracle(const Matrix& h, const InteractionGraph& train, const Positives& positives,
                             std::size_t n) {
  RankingMetrics m;
  double recall = 0.0, ndcg = 0.0;
  for (NodeId u = 0; u < train.num_users(); ++u) {
    if (positives[u].empty()) {
      ++m.users_skipped;
      continue;
    }
    const auto seen = train.neighbors(u);
    std::vector<std::pair<double, NodeId>> ranked;
    for (std::size_t j = 0; j < train.num_items(); ++j) {
      const NodeId item = train.item_node(j);
      if (std::find(seen.begin(), seen.end(), item) != seen.end()) continue;
      ranked.emplace_back(-h.row(u).dot(h.row(item)), item);
    }
    std::sort(ranked.begin(), ranked.end());
    const std::set<NodeId> pos(positives[u].begin(), positives[u].end());
    double hits = 0.0, dcg = 0.0, idcg = 0.0;
    for (std::size_t r = 0; r < std::min(n, ranked.size()); ++r) {
      if (pos.count(ranked[r].second)) {
        hits += 1.0;
        dcg += 1.0 / std::log2(r + 2.0);
      }
    }
    for (std::size_t r = 0; r < std::min(n, pos.size()); ++r) idcg += 1.0 / std::log2(r + 2.0);
    recall += hits / pos.size();
    ndcg += dcg / idcg;
    ++m.users_evaluated;
  }
  m.recall[n] = recall / m.users_evaluated;
  m.ndcg[n] = ndcg / m.users_evaluated;
  return m;
}

}  // namespace tgnn::test
