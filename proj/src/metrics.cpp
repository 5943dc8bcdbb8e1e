#include "tgnn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tgnn {

double score(const Matrix& h, const InteractionGraph& graph, NodeId user, NodeId item) {
  if (!graph.is_user(user)) throw ContractError("score: node " + std::to_string(user) + " is not a user");
  if (!graph.is_item(item)) throw ContractError("score: node " + std::to_string(item) + " is not an item");
  return h.row(user).dot(h.row(item));
}

double pairwise_loss(double pos_score, double neg_score) {
  const double x = neg_score - pos_score;
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

NodeId sample_negative(Rng& rng, const InteractionGraph& graph, NodeId user) {
  if (!graph.is_user(user)) throw ContractError("sample_negative: node " + std::to_string(user) + " is not a user");
  const auto seen = graph.neighbors(user);
  const std::size_t free = graph.num_items() - seen.size();
  if (free == 0) throw ContractError("sample_negative: user " + std::to_string(user) + " interacted with every item");
  // Draw a rank among the non-interacted items, then skip past interacted ones.
  std::uniform_int_distribution<std::size_t> pick(0, free - 1);
  std::size_t target = graph.num_users() + pick(rng);
  for (NodeId s : seen) {
    if (s <= target) ++target;
    else break;
  }
  return static_cast<NodeId>(target);
}

RankingMetrics evaluate_rankings(const InteractionGraph& train, const Positives& positives,
                                 std::span<const std::size_t> cutoffs, const ItemScorer& scorer) {
  if (positives.size() != train.num_users()) {
    throw ShapeError("evaluate: positives for " + std::to_string(positives.size()) + " users, graph has " +
                     std::to_string(train.num_users()));
  }
  if (cutoffs.empty()) throw ContractError("evaluate: no cutoffs");
  const std::size_t max_n = *std::max_element(cutoffs.begin(), cutoffs.end());
  const std::size_t items = train.num_items();
  const NodeId offset = static_cast<NodeId>(train.num_users());

  RankingMetrics m;
  for (auto c : cutoffs) {
    m.recall[c] = 0.0;
    m.ndcg[c] = 0.0;
  }
  std::vector<double> scores(items);
  std::vector<char> excluded(items), relevant(items);
  std::vector<NodeId> candidates;
  for (NodeId u = 0; u < train.num_users(); ++u) {
    const auto& pos = positives[u];
    if (pos.empty()) {
      ++m.users_skipped;
      continue;
    }
    std::fill(excluded.begin(), excluded.end(), 0);
    std::fill(relevant.begin(), relevant.end(), 0);
    for (NodeId i : train.neighbors(u)) excluded[i - offset] = 1;
    for (NodeId i : pos) {
      if (!train.is_item(i)) throw ContractError("evaluate: positive " + std::to_string(i) + " is not an item");
      if (excluded[i - offset]) {
        throw ContractError("evaluate: user " + std::to_string(u) + " has test item " + std::to_string(i) +
                            " in its train interactions");
      }
      relevant[i - offset] = 1;
    }
    std::size_t num_relevant = 0;
    for (char r : relevant) num_relevant += r;
    scorer(u, scores);
    candidates.clear();
    for (NodeId j = 0; j < items; ++j) {
      if (!excluded[j]) candidates.push_back(j);
    }
    const std::size_t depth = std::min(max_n, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(depth), candidates.end(),
                      [&](NodeId a, NodeId b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });
    for (auto c : cutoffs) {
      double hits = 0.0, dcg = 0.0, idcg = 0.0;
      for (std::size_t r = 0; r < std::min(c, depth); ++r) {
        if (relevant[candidates[r]]) {
          hits += 1.0;
          dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
        }
      }
      for (std::size_t r = 0; r < std::min(c, num_relevant); ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
      m.recall[c] += hits / static_cast<double>(num_relevant);
      m.ndcg[c] += dcg / idcg;
    }
    ++m.users_evaluated;
  }
  if (m.users_evaluated > 0) {
    for (auto& [c, v] : m.recall) v /= static_cast<double>(m.users_evaluated);
    for (auto& [c, v] : m.ndcg) v /= static_cast<double>(m.users_evaluated);
  }
  return m;
}

RankingMetrics evaluate_all_rank(const Matrix& h, const InteractionGraph& train, const Positives& positives,
                                 std::span<const std::size_t> cutoffs, MacCounter* counter) {
  if (h.rows() != static_cast<Index>(train.num_nodes())) {
    throw ShapeError("evaluate_all_rank: representations " + shape_of(h) + " for " +
                     std::to_string(train.num_nodes()) + " nodes");
  }
  const Index items = static_cast<Index>(train.num_items());
  const auto item_rows = h.bottomRows(items);
  std::uint64_t macs = 0;
  auto result = evaluate_rankings(train, positives, cutoffs, [&](NodeId u, std::vector<double>& scores) {
    Eigen::Map<RowVector> out(scores.data(), items);
    out.noalias() = h.row(u) * item_rows.transpose();
    macs += static_cast<std::uint64_t>(items) * static_cast<std::uint64_t>(h.cols());
  });
  if (counter) counter->add(Phase::eval, macs);
  return result;
}

RankingMetrics popularity_baseline(const InteractionGraph& train, const Positives& positives,
                                   std::span<const std::size_t> cutoffs) {
  std::vector<double> pop(train.num_items());
  for (std::size_t j = 0; j < pop.size(); ++j) pop[j] = static_cast<double>(train.neighbors(train.item_node(j)).size());
  return evaluate_rankings(train, positives, cutoffs, [&](NodeId, std::vector<double>& scores) { scores = pop; });
}

RankingMetrics random_baseline(const InteractionGraph& train, const Positives& positives,
                               std::span<const std::size_t> cutoffs, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return evaluate_rankings(train, positives, cutoffs, [&](NodeId, std::vector<double>& scores) {
    for (double& s : scores) s = u(rng);
  });
}

}  // namespace tgnn
