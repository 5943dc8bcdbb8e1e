#include "tgnn/layers.hpp"

#include <cmath>

namespace tgnn {

Var transformer_layer(const AttentionWeights<Var>& w, Var centers, Var contexts, Index per_center,
                      const AttentionOptions& opts) {
  if (per_center == 0) return centers;
  if (contexts.rows() != centers.rows() * per_center) {
    throw ShapeError("transformer_layer: " + std::to_string(contexts.rows()) + " context rows for " +
                     std::to_string(centers.rows()) + " centers x " + std::to_string(per_center));
  }
  if (opts.weights_out) opts.weights_out->clear();
  std::vector<Var> heads;
  heads.reserve(w.wq.size());
  for (std::size_t h = 0; h < w.wq.size(); ++h) {
    Var q = matmul(centers, w.wq[h]);
    Var k = matmul(contexts, w.wk[h]);
    Var v = matmul(contexts, w.wv[h]);
    Matrix weights;
    heads.push_back(sample_attention(q, k, v, per_center, opts.dropout, opts.rng,
                                     opts.weights_out ? &weights : nullptr));
    if (opts.weights_out) opts.weights_out->push_back(std::move(weights));
  }
  Var out = matmul(concat_cols(heads), w.wm);
  return opts.residual ? add(out, centers) : out;
}

RowVector transformer_layer(const AttentionWeights<Matrix>& w, const RowVector& h_center, const Matrix& samples,
                            bool residual) {
  if (samples.rows() == 0) return h_center;
  if (samples.cols() != h_center.cols()) {
    throw ShapeError("transformer_layer: samples " + shape_of(samples) + " vs center " + shape_of(h_center));
  }
  Tape tape;
  AttentionWeights<Var> bound;
  for (std::size_t h = 0; h < w.wq.size(); ++h) {
    bound.wq.push_back(tape.constant(w.wq[h]));
    bound.wk.push_back(tape.constant(w.wk[h]));
    bound.wv.push_back(tape.constant(w.wv[h]));
  }
  bound.wm = tape.constant(w.wm);
  AttentionOptions opts;
  opts.residual = residual;
  Var out = transformer_layer(bound, tape.constant(h_center), tape.constant(samples), samples.rows(), opts);
  return out.value().row(0);
}

std::shared_ptr<const SparseMatrix> mean_aggregator(const Adjacency& graph) {
  const Index n = static_cast<Index>(graph.num_nodes());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(graph.neighbors.size());
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    const auto nb = graph.neighbors_of(v);
    const double w = nb.empty() ? 0.0 : 1.0 / static_cast<double>(nb.size());
    for (NodeId u : nb) entries.emplace_back(static_cast<Index>(v), static_cast<Index>(u), w);
  }
  auto m = std::make_shared<SparseMatrix>(n, n);
  m->setFromTriplets(entries.begin(), entries.end());
  m->makeCompressed();
  return m;
}

Var gnn_layer(Var weight, Var h, const std::shared_ptr<const SparseMatrix>& mean_adj) {
  const Var parts[] = {h, spmm(mean_adj, h)};
  return relu(matmul(concat_cols(parts), weight));
}

Matrix gnn_layer(const Matrix& weight, const Matrix& h, const Adjacency& graph) {
  Tape tape;
  return gnn_layer(tape.constant(weight), tape.constant(h), mean_aggregator(graph)).value();
}

GraphContext make_context(const Adjacency& graph, const AttentionSamples& samples,
                          const StructuralFeatures& features) {
  if (samples.num_nodes() != graph.num_nodes() || features.num_nodes() != graph.num_nodes()) {
    throw ShapeError("make_context: graph, samples and features disagree on the node count");
  }
  return {&graph, &samples, &features, mean_aggregator(graph)};
}

Var forward(const ModelWeights<Var>& w, const ModelConfig& cfg, const GraphContext& ctx, const ForwardOptions& opts) {
  Tape& tape = *w.embedding.tape;
  MacCounter* counter = tape.counter();
  if (w.embedding.rows() != static_cast<Index>(ctx.graph->num_nodes())) {
    throw ShapeError("forward: embedding table " + shape_of(w.embedding.value()) + " for a graph of " +
                     std::to_string(ctx.graph->num_nodes()) + " nodes");
  }
  if (w.attention.size() != cfg.count(LayerKind::transformer) || w.sage.size() != cfg.count(LayerKind::gnn)) {
    throw ShapeError("forward: weights do not match the layer stack " + to_string(cfg.stack));
  }

  EnhancedInput input;
  {
    PhaseScope scope(counter, Phase::encode);
    input = enhance_all(w.encoder, w.embedding, *ctx.samples, *ctx.features, opts.ablations.encodings(),
                        opts.dropout, opts.rng);
  }
  const auto& flat = ctx.samples->flat();
  const std::vector<Index> sample_rows(flat.begin(), flat.end());

  Var h = input.centers;
  bool fused_input = true;
  std::size_t t_index = 0, g_index = 0;
  for (LayerKind kind : cfg.stack) {
    if (kind == LayerKind::transformer) {
      const std::size_t idx = t_index++;
      if (opts.ablations.transformer) continue;
      PhaseScope scope(counter, Phase::transformer);
      Var contexts = fused_input ? input.contexts : gather_rows(h, sample_rows);
      AttentionOptions ao;
      ao.dropout = opts.dropout;
      ao.rng = opts.rng;
      h = transformer_layer(w.attention[idx], h, contexts, input.per_center, ao);
    } else {
      const std::size_t idx = g_index++;
      if (opts.ablations.gnn) continue;
      PhaseScope scope(counter, Phase::gnn);
      h = gnn_layer(w.sage[idx], h, ctx.mean_adj);
    }
    fused_input = false;
  }
  return h;
}

Matrix forward(const ModelParams& params, const ModelConfig& cfg, const GraphContext& ctx, const Ablations& ablations,
               MacCounter* counter) {
  Tape tape(counter);
  ForwardOptions opts;
  opts.ablations = ablations;
  return forward(bind_constant(tape, params), cfg, ctx, opts).value();
}

ModelWeights<Var> bind(Tape& tape, const ModelParams& params) {
  return map_tensors<Var>(params, [&](const Matrix& m) { return tape.leaf(m); });
}

ModelWeights<Var> bind_constant(Tape& tape, const ModelParams& params) {
  return map_tensors<Var>(params, [&](const Matrix& m) { return tape.constant(m); });
}

}  // namespace tgnn
