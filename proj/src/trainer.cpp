#include "tgnn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "tgnn/adam.hpp"
#include "tgnn/gradcheck.hpp"

namespace tgnn {

UpdateStrategy parse_update_strategy(std::string_view text) {
  if (text == "message_passing") return UpdateStrategy::message_passing;
  if (text == "random_walk") return UpdateStrategy::random_walk;
  if (text == "none") return UpdateStrategy::none;
  throw ParseError("update: expected message_passing, random_walk or none, got '" + std::string(text) + "'");
}

std::string to_string(UpdateStrategy s) {
  switch (s) {
    case UpdateStrategy::message_passing: return "message_passing";
    case UpdateStrategy::random_walk: return "random_walk";
    case UpdateStrategy::none: return "none";
  }
  return "none";
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ContractError("train: lr must be positive");
  if (weight_decay < 0.0 || weight_decay > 1e-2) throw ContractError("train: weight_decay must be in [0, 1e-2]");
  if (dropout < 0.0 || dropout >= 1.0) throw ContractError("train: dropout must be in [0, 1)");
  if (patience < 1) throw ContractError("train: patience must be at least 1");
  if (neg_per_pos < 1) throw ContractError("train: neg_per_pos must be at least 1");
  if (batch_users < 1) throw ContractError("train: batch_users must be at least 1");
  if (walk_len < 1) throw ContractError("train: walk_len must be at least 1");
  if (topn.empty()) throw ContractError("train: topn must list at least one cutoff");
}

PreparedData prepare_data(const InteractionGraph& graph, double holdout_fraction) {
  PreparedData d;
  d.full = graph;
  Split test = chronological_split(graph, holdout_fraction);
  d.train = std::move(test.train);
  d.test = std::move(test.test_items);
  Split val = holdout_last_item(d.train);
  d.fit = std::move(val.train);
  d.validation = std::move(val.test_items);
  return d;
}

Precomputed precompute(const InteractionGraph& fit, Index embed_dim, std::uint64_t seed,
                       const PrecomputeOptions& opts) {
  Precomputed out;
  const Matrix x = initial_embedding(fit.num_nodes(), embed_dim, seed);
  out.samples = build_attention_samples(x, fit.adjacency(), opts.sampling, &out.macs);
  out.features = compute_structural_features(fit.adjacency(), out.samples, opts.cap, opts.pagerank);
  return out;
}

Var pairwise_loss(Var h, std::span<const Triple> triples) {
  std::vector<Index> us, ps, ns;
  us.reserve(triples.size());
  ps.reserve(triples.size());
  ns.reserve(triples.size());
  for (const auto& t : triples) {
    us.push_back(t.user);
    ps.push_back(t.positive);
    ns.push_back(t.negative);
  }
  Var hu = gather_rows(h, us);
  Var pos = row_dot(hu, gather_rows(h, ps));
  Var neg = row_dot(hu, gather_rows(h, ns));
  return sum(softplus(sub(neg, pos)));
}

namespace {

std::string rng_state_of(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::vector<Var> var_list(ModelWeights<Var>& vars) {
  std::vector<Var> out;
  for_each_tensor(vars, [&](const std::string&, Var& v) { out.push_back(v); });
  return out;
}

std::size_t count_changed(const AttentionSamples& before, const AttentionSamples& after) {
  std::size_t changed = 0;
  for (NodeId v = 0; v < before.num_nodes(); ++v) {
    auto a = before.of(v), b = after.of(v);
    std::vector<NodeId> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<NodeId> common;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
    changed += x.size() - common.size();
  }
  return changed;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const PreparedData& data, Precomputed pre,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  model.validate();
  const auto started = std::chrono::steady_clock::now();
  const InteractionGraph& fit = data.fit;
  if (model.num_nodes != fit.num_nodes() || pre.samples.num_nodes() != fit.num_nodes()) {
    throw ShapeError("train: model, samples and graph disagree on the node count");
  }

  // Parameter init consumes Rng(seed); the training stream is derived separately.
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  ModelState state;
  state.model = model;
  state.ablations = cfg.ablations;
  state.cap = pre.features.cap;
  state.params = init_model(model, cfg.seed);
  state.samples = std::move(pre.samples);
  state.rng_state = rng_state_of(rng);
  StructuralFeatures features = std::move(pre.features);
  ensure_hops(features, fit.adjacency(), state.samples);

  TrainResult result;
  result.best = state;
  EvalReport& report = result.report;
  report.flops = pre.macs;

  const UpdateStrategy strategy = cfg.ablations.message_passing ? UpdateStrategy::none : cfg.update;
  const auto sequences = user_sequences(fit);
  std::vector<NodeId> users;
  for (const auto& s : sequences) {
    if (s.items.size() >= 2 && fit.neighbors(s.user).size() < fit.num_items()) users.push_back(s.user);
  }
  const auto mean_adj = mean_aggregator(fit.adjacency());
  AdamState adam;
  adam.lr = cfg.lr;
  std::vector<Matrix*> params = tensor_list(state.params);
  const auto names = tensor_names(state.params);
  const std::size_t val_cutoff[] = {20};

  ForwardOptions fopts;
  fopts.ablations = cfg.ablations;
  fopts.dropout = cfg.dropout;
  fopts.rng = &rng;

  double best_val = -1.0;
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(users.begin(), users.end(), rng);
    GraphContext ctx{&fit.adjacency(), &state.samples, &features, mean_adj};
    // One forward pass per epoch; user batches contribute summed loss terms and
    // the accumulated gradient drives a single Adam step.
    Tape tape(&report.flops);
    ModelWeights<Var> vars = bind(tape, state.params);
    Var out = forward(vars, model, ctx, fopts);
    std::vector<Var> batch_losses;
    std::size_t epoch_pairs = 0;
    for (std::size_t begin = 0; begin < users.size(); begin += cfg.batch_users) {
      const std::size_t end = std::min(users.size(), begin + cfg.batch_users);
      std::vector<Triple> triples;
      for (std::size_t b = begin; b < end; ++b) {
        const auto& items = sequences[users[b]].items;
        for (std::size_t t = 1; t < items.size(); ++t) {
          for (std::size_t n = 0; n < cfg.neg_per_pos; ++n) {
            triples.push_back({users[b], items[t], sample_negative(rng, fit, users[b])});
          }
        }
      }
      if (triples.empty()) continue;
      batch_losses.push_back(pairwise_loss(out, triples));
      epoch_pairs += triples.size();
    }
    double epoch_loss = 0.0;
    if (!batch_losses.empty()) {
      Var loss = batch_losses.front();
      for (std::size_t b = 1; b < batch_losses.size(); ++b) loss = add(loss, batch_losses[b]);
      epoch_loss = loss.value()(0, 0);
      if (!std::isfinite(epoch_loss)) {
        std::string culprit = "loss";
        for (std::size_t i = 0; i < params.size(); ++i) {
          if (!params[i]->allFinite()) {
            culprit = names[i];
            break;
          }
        }
        if (culprit == "loss" && !out.value().allFinite()) culprit = "final representations";
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) + "; first non-finite tensor: " +
                           culprit);
      }
      tape.backward(loss);
      std::vector<Matrix> grads;
      const auto bound = var_list(vars);
      grads.reserve(bound.size());
      for (std::size_t i = 0; i < bound.size(); ++i) {
        Matrix g = bound[i].grad();
        if (cfg.weight_decay > 0.0) g += cfg.weight_decay * (*params[i]);
        if (!g.allFinite()) throw NumericError("train: non-finite gradient in " + names[i]);
        grads.push_back(std::move(g));
      }
      adam_step(adam, params, grads);
    }

    const Matrix h = forward(state.params, model, ctx, cfg.ablations, &report.flops);
    require_finite(h, "representations after epoch " + std::to_string(epoch));
    EpochRecord record;
    record.epoch = epoch;
    record.loss = epoch_loss;
    record.pairs = epoch_pairs;
    record.val_recall = evaluate_all_rank(h, fit, data.validation, val_cutoff, &report.flops).recall.at(20);
    if (record.val_recall > best_val) {
      best_val = record.val_recall;
      best_epoch = epoch;
      result.best.params = state.params;
      result.best.samples = state.samples;
      result.best.epoch = epoch;
      result.best.rng_state = rng_state_of(rng);
    }

    if (strategy != UpdateStrategy::none) {
      AttentionSamples updated = strategy == UpdateStrategy::message_passing
                                     ? message_passing_update(h, fit.adjacency(), state.samples, &report.flops)
                                     : random_walk_update(h, fit.adjacency(), state.samples, {cfg.walk_len}, rng,
                                                          &report.flops);
      record.samples_changed = count_changed(state.samples, updated);
      state.samples = std::move(updated);
      ensure_hops(features, fit.adjacency(), state.samples);
    }
    report.loss_trace.push_back(epoch_loss);
    report.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
    if (epoch - best_epoch >= cfg.patience) break;
  }
  report.best_epoch = best_epoch;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

Matrix infer(const ModelState& state, const PreparedData& data, MacCounter* counter) {
  const auto features = compute_structural_features(data.fit.adjacency(), state.samples, state.cap);
  const GraphContext ctx = make_context(data.fit.adjacency(), state.samples, features);
  return forward(state.params, state.model, ctx, state.ablations, counter);
}

RankingMetrics evaluate_model(const ModelState& state, const PreparedData& data, std::span<const std::size_t> cutoffs,
                              MacCounter* counter) {
  const Matrix h = infer(state, data, counter);
  return evaluate_all_rank(h, data.train, data.test, cutoffs, counter);
}

double model_gradient_check(const ModelConfig& model, ModelParams params, const GraphContext& ctx,
                            const Ablations& ablations, std::span<const Triple> triples, double h) {
  Tape tape;
  ModelWeights<Var> vars = bind(tape, params);
  ForwardOptions opts;
  opts.ablations = ablations;
  Var out = forward(vars, model, ctx, opts);
  Var loss = pairwise_loss(out, triples);
  tape.backward(loss);
  std::vector<Matrix> analytic;
  for (const auto& v : var_list(vars)) analytic.push_back(v.grad());

  auto loss_fn = [&] {
    Tape eval;
    Var hv = forward(bind_constant(eval, params), model, ctx, opts);
    return pairwise_loss(hv, triples).value()(0, 0);
  };
  auto list = tensor_list(params);
  return finite_difference_check(list, analytic, loss_fn, h).max_relative_error;
}

}  // namespace tgnn
