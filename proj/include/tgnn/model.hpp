#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tgnn/positional_encoding.hpp"

namespace tgnn {

enum class LayerKind : char { transformer = 'T', gnn = 'G' };
using LayerStack = std::vector<LayerKind>;

/// Parses a comma list over {T, G}, e.g. "T,G,T,G,T".
LayerStack parse_stack(std::string_view text);
std::string to_string(const LayerStack& stack);

/// Per-head query/key/value projections (d x d_head) and the output
/// projection W_m (heads * d_head x d).
template <typename T>
struct AttentionWeights {
  std::vector<T> wq, wk, wv;
  T wm;
};

/// Every trainable tensor. One GraphSAGE weight (2d x d) per G layer.
template <typename T>
struct ModelWeights {
  T embedding;
  EncoderWeights<T> encoder;
  std::vector<AttentionWeights<T>> attention;
  std::vector<T> sage;
};

using ModelParams = ModelWeights<Matrix>;

/// Visits tensors in a fixed order with a stable dotted name.
template <typename W, typename F>
void for_each_tensor(W& w, F&& f) {
  f(std::string("embedding"), w.embedding);
  for_each_tensor(w.encoder, "encoder", f);
  for (std::size_t l = 0; l < w.attention.size(); ++l) {
    auto& a = w.attention[l];
    const std::string p = "attention." + std::to_string(l);
    for (std::size_t h = 0; h < a.wq.size(); ++h) {
      f(p + ".wq." + std::to_string(h), a.wq[h]);
      f(p + ".wk." + std::to_string(h), a.wk[h]);
      f(p + ".wv." + std::to_string(h), a.wv[h]);
    }
    f(p + ".wm", a.wm);
  }
  for (std::size_t l = 0; l < w.sage.size(); ++l) f("sage." + std::to_string(l), w.sage[l]);
}

/// Builds a ModelWeights<U> with the same layout by mapping every tensor.
template <typename U, typename T, typename F>
ModelWeights<U> map_tensors(const ModelWeights<T>& src, F&& fn) {
  ModelWeights<U> dst;
  dst.attention.resize(src.attention.size());
  for (std::size_t l = 0; l < src.attention.size(); ++l) {
    dst.attention[l].wq.resize(src.attention[l].wq.size());
    dst.attention[l].wk.resize(src.attention[l].wk.size());
    dst.attention[l].wv.resize(src.attention[l].wv.size());
  }
  dst.sage.resize(src.sage.size());
  std::vector<U*> out;
  for_each_tensor(dst, [&](const std::string&, U& t) { out.push_back(&t); });
  std::size_t i = 0;
  for_each_tensor(const_cast<ModelWeights<T>&>(src), [&](const std::string&, T& t) { *out[i++] = fn(t); });
  return dst;
}

struct ModelConfig {
  std::size_t num_nodes = 0;
  Index embed_dim = 64;
  Index pe_dim = 8;
  Index heads = 4;
  LayerStack stack{LayerKind::transformer, LayerKind::gnn, LayerKind::transformer, LayerKind::gnn,
                   LayerKind::transformer};

  Index head_dim() const { return embed_dim / heads; }
  std::size_t count(LayerKind kind) const;
  void validate() const;
};

/// Component switches. Each flag removes one component.
struct Ablations {
  bool sampling = false;       // AS: samples by graph distance instead of similarity
  bool positional = false;     // PE: all three encodings off
  bool spe = false;
  bool de = false;
  bool pre = false;
  bool transformer = false;    // Trans: drop T layers from the stack
  bool gnn = false;            // GNN: drop G layers from the stack
  bool message_passing = false;  // MP: no sample update

  EncodingToggles encodings() const { return {!(positional || spe), !(positional || de), !(positional || pre)}; }
  LayerStack apply(const LayerStack& stack) const;
  bool any() const { return sampling || positional || spe || de || pre || transformer || gnn || message_passing; }
};

/// Parses a comma list such as "Trans,SPE"; an empty string means none.
Ablations parse_ablations(std::string_view text);
std::string to_string(const Ablations& a);

/// Embedding table drawn first from Rng(seed). Attention sampling at
/// preprocessing uses exactly this table.
Matrix initial_embedding(std::size_t num_nodes, Index embed_dim, std::uint64_t seed);

/// Embedding N(0, 0.3^2); other weights Xavier-uniform, attention output
/// projections scaled by 0.1; biases zero.
ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed);

std::vector<Matrix*> tensor_list(ModelParams& params);
std::vector<std::string> tensor_names(const ModelParams& params);

}  // namespace tgnn
