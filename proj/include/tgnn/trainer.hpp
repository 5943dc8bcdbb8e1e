#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tgnn/attention_sampling.hpp"
#include "tgnn/layers.hpp"
#include "tgnn/metrics.hpp"
#include "tgnn/model.hpp"
#include "tgnn/sample_update.hpp"
#include "tgnn/structural_features.hpp"

namespace tgnn {

enum class UpdateStrategy { message_passing, random_walk, none };

UpdateStrategy parse_update_strategy(std::string_view text);
std::string to_string(UpdateStrategy s);

struct TrainConfig {
  double lr = 5e-3;
  double weight_decay = 1e-4;
  double dropout = 0.0;
  std::size_t epochs = 80;
  std::size_t patience = 20;
  std::size_t neg_per_pos = 1;
  std::size_t batch_users = 256;
  std::uint64_t seed = 2024;
  UpdateStrategy update = UpdateStrategy::message_passing;
  std::uint32_t walk_len = 3;
  Ablations ablations;
  std::vector<std::size_t> topn{20, 40};

  void validate() const;
};

/// The splits every stage derives deterministically from one ingested graph.
struct PreparedData {
  InteractionGraph full;
  InteractionGraph train;  // chronological train part
  Positives test;
  InteractionGraph fit;    // train minus the most recent item per user
  Positives validation;
};

PreparedData prepare_data(const InteractionGraph& graph, double holdout_fraction = 0.2);

struct PrecomputeOptions {
  SamplingOptions sampling;
  std::uint32_t cap = 6;
  PageRankOptions pagerank;
};

struct Precomputed {
  AttentionSamples samples;
  StructuralFeatures features;
  MacCounter macs;
};

/// Attention samples from the initial embedding table plus structural scalars.
Precomputed precompute(const InteractionGraph& fit, Index embed_dim, std::uint64_t seed,
                       const PrecomputeOptions& opts);

/// Everything needed to reproduce representations: weights, current samples,
/// the hop cap and the stream position of the training PRNG.
struct ModelState {
  ModelConfig model;
  Ablations ablations;
  std::uint32_t cap = 6;
  ModelParams params;
  AttentionSamples samples;
  std::uint64_t epoch = 0;
  std::string rng_state;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val_recall = 0.0;
  std::size_t pairs = 0;
  std::size_t samples_changed = 0;
};

struct EvalReport {
  std::map<std::size_t, double> recall;
  std::map<std::size_t, double> ndcg;
  std::vector<double> loss_trace;
  std::vector<EpochRecord> epochs;
  MacCounter flops;
  std::size_t best_epoch = 0;
  std::size_t users_skipped = 0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelState best;
  EvalReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// BPR training on the fit graph with validation-driven early stopping; the
/// returned state is the best validation epoch. `report` carries the loss
/// trace and MAC counters; test metrics are filled by evaluate_model.
TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const PreparedData& data, Precomputed pre,
                  const EpochCallback& on_epoch = {});

/// Representations of `state` over the fit graph.
Matrix infer(const ModelState& state, const PreparedData& data, MacCounter* counter = nullptr);

/// Test-set all-rank metrics of a trained state.
RankingMetrics evaluate_model(const ModelState& state, const PreparedData& data, std::span<const std::size_t> cutoffs,
                              MacCounter* counter = nullptr);

/// One (user, positive, negative) triple.
struct Triple {
  NodeId user, positive, negative;
};

/// Summed pairwise loss over triples for final representations `h`.
Var pairwise_loss(Var h, std::span<const Triple> triples);

/// Central-difference check of the full model on `triples`, dropout off.
double model_gradient_check(const ModelConfig& model, ModelParams params, const GraphContext& ctx,
                            const Ablations& ablations, std::span<const Triple> triples, double h = 1e-5);

}  // namespace tgnn
