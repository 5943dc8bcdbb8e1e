#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "tgnn/dense.hpp"
#include "tgnn/flops.hpp"
#include "tgnn/graph.hpp"

namespace tgnn {

/// Per user, held-out positive item node ids.
using Positives = std::vector<std::vector<NodeId>>;

struct RankingMetrics {
  std::map<std::size_t, double> recall;
  std::map<std::size_t, double> ndcg;
  std::size_t users_evaluated = 0;
  std::size_t users_skipped = 0;  // no held-out positives
};

/// h_user . h_item; throws ContractError when the roles are wrong.
double score(const Matrix& h, const InteractionGraph& graph, NodeId user, NodeId item);

/// -log sigmoid(pos - neg), evaluated as softplus(neg - pos).
double pairwise_loss(double pos_score, double neg_score);

/// Uniform over items the user has not interacted with in `graph`.
NodeId sample_negative(Rng& rng, const InteractionGraph& graph, NodeId user);

/// Fills `scores` (length J, indexed by item index) for one user.
using ItemScorer = std::function<void(NodeId user, std::vector<double>& scores)>;

/// All-rank protocol: every item the user has not interacted with in `train`
/// competes with the positives; ties rank the lower item id first.
RankingMetrics evaluate_rankings(const InteractionGraph& train, const Positives& positives,
                                 std::span<const std::size_t> cutoffs, const ItemScorer& scorer);

RankingMetrics evaluate_all_rank(const Matrix& h, const InteractionGraph& train, const Positives& positives,
                                 std::span<const std::size_t> cutoffs, MacCounter* counter = nullptr);

/// Items ranked by training degree, identical for every user.
RankingMetrics popularity_baseline(const InteractionGraph& train, const Positives& positives,
                                   std::span<const std::size_t> cutoffs);

/// Uniformly random scores from Rng(seed).
RankingMetrics random_baseline(const InteractionGraph& train, const Positives& positives,
                               std::span<const std::size_t> cutoffs, std::uint64_t seed);

}  // namespace tgnn
