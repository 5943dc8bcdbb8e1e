#pragma once

#include <memory>
#include <vector>

#include "tgnn/model.hpp"
#include "tgnn/tape.hpp"

namespace tgnn {

struct AttentionOptions {
  /// Adds the center representation to the projected attention output.
  bool residual = true;
  double dropout = 0.0;
  Rng* rng = nullptr;
  /// Receives one N x per_center attention matrix per head.
  std::vector<Matrix>* weights_out = nullptr;
};

/// Multi-head attention of every center over its own samples.
/// `contexts` holds per_center rows per center (center-major). With
/// per_center == 0 the centers pass through unchanged.
Var transformer_layer(const AttentionWeights<Var>& w, Var centers, Var contexts, Index per_center,
                      const AttentionOptions& opts = {});

/// Single-center form: h_center attends over the rows of `samples`.
RowVector transformer_layer(const AttentionWeights<Matrix>& w, const RowVector& h_center, const Matrix& samples,
                            bool residual = true);

/// Row-normalized adjacency (mean over neighbors; isolated rows are empty).
std::shared_ptr<const SparseMatrix> mean_aggregator(const Adjacency& graph);

/// GraphSAGE-mean: relu([h_i | mean_{k in N(i)} h_k] W), all rows from the input H.
Var gnn_layer(Var weight, Var h, const std::shared_ptr<const SparseMatrix>& mean_adj);
Matrix gnn_layer(const Matrix& weight, const Matrix& h, const Adjacency& graph);

/// Everything the forward pass reads besides the weights.
struct GraphContext {
  const Adjacency* graph = nullptr;
  const AttentionSamples* samples = nullptr;
  const StructuralFeatures* features = nullptr;
  std::shared_ptr<const SparseMatrix> mean_adj;
};

GraphContext make_context(const Adjacency& graph, const AttentionSamples& samples,
                          const StructuralFeatures& features);

struct ForwardOptions {
  Ablations ablations;
  double dropout = 0.0;
  Rng* rng = nullptr;
};

/// Positional fusion once at the input, then the layer stack in order. The
/// first layer, when it is a Transformer layer, attends over the fused
/// (center-dependent) sample rows; later Transformer layers gather the
/// current representations of the samples.
Var forward(const ModelWeights<Var>& w, const ModelConfig& cfg, const GraphContext& ctx,
            const ForwardOptions& opts = {});

/// Inference forward pass without gradient bookkeeping.
Matrix forward(const ModelParams& params, const ModelConfig& cfg, const GraphContext& ctx,
               const Ablations& ablations = {}, MacCounter* counter = nullptr);

ModelWeights<Var> bind(Tape& tape, const ModelParams& params);
ModelWeights<Var> bind_constant(Tape& tape, const ModelParams& params);

}  // namespace tgnn
