#include "tgnn/model.hpp"

#include <sstream>

namespace tgnn {

namespace {

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text) {
    if (c == ',') {
      out.push_back(item);
      item.clear();
    } else if (c != ' ' && c != '\t') {
      item.push_back(c);
    }
  }
  out.push_back(item);
  return out;
}

}  // namespace

LayerStack parse_stack(std::string_view text) {
  LayerStack stack;
  for (const auto& item : split_list(text)) {
    if (item == "T") {
      stack.push_back(LayerKind::transformer);
    } else if (item == "G") {
      stack.push_back(LayerKind::gnn);
    } else {
      throw ParseError("layer stack: expected T or G, got '" + item + "'");
    }
  }
  return stack;
}

std::string to_string(const LayerStack& stack) {
  std::string out;
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (i) out.push_back(',');
    out.push_back(static_cast<char>(stack[i]));
  }
  return out;
}

std::size_t ModelConfig::count(LayerKind kind) const {
  std::size_t c = 0;
  for (auto k : stack) c += (k == kind);
  return c;
}

void ModelConfig::validate() const {
  if (embed_dim < 1 || pe_dim < 1 || heads < 1) throw ContractError("model: widths and heads must be positive");
  if (embed_dim % heads != 0) {
    throw ContractError("model: embed_dim " + std::to_string(embed_dim) + " is not divisible by " +
                        std::to_string(heads) + " heads");
  }
  if (stack.empty()) throw ContractError("model: empty layer stack");
}

LayerStack Ablations::apply(const LayerStack& stack) const {
  LayerStack out;
  for (auto k : stack) {
    if (k == LayerKind::transformer && transformer) continue;
    if (k == LayerKind::gnn && gnn) continue;
    out.push_back(k);
  }
  return out;
}

Ablations parse_ablations(std::string_view text) {
  Ablations a;
  if (text.find_first_not_of(" \t") == std::string_view::npos) return a;
  for (const auto& item : split_list(text)) {
    if (item == "AS") a.sampling = true;
    else if (item == "PE") a.positional = true;
    else if (item == "SPE") a.spe = true;
    else if (item == "DE") a.de = true;
    else if (item == "PRE") a.pre = true;
    else if (item == "Trans") a.transformer = true;
    else if (item == "GNN") a.gnn = true;
    else if (item == "MP") a.message_passing = true;
    else throw ParseError("ablate: unknown switch '" + item + "' (expected AS, PE, SPE, DE, PRE, Trans, GNN, MP)");
  }
  return a;
}

std::string to_string(const Ablations& a) {
  std::vector<std::string> parts;
  if (a.sampling) parts.push_back("AS");
  if (a.positional) parts.push_back("PE");
  if (a.spe) parts.push_back("SPE");
  if (a.de) parts.push_back("DE");
  if (a.pre) parts.push_back("PRE");
  if (a.transformer) parts.push_back("Trans");
  if (a.gnn) parts.push_back("GNN");
  if (a.message_passing) parts.push_back("MP");
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

namespace {

// Embedding rows on the scale of the fused positional signal, and attention
// branches that start close to the residual identity.
constexpr double kEmbeddingStd = 0.3;
constexpr double kOutputProjectionGain = 0.1;

}  // namespace

Matrix initial_embedding(std::size_t num_nodes, Index embed_dim, std::uint64_t seed) {
  Rng rng(seed);
  return normal_matrix(static_cast<Index>(num_nodes), embed_dim, kEmbeddingStd, rng);
}

ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ModelParams p;
  p.embedding = normal_matrix(static_cast<Index>(cfg.num_nodes), cfg.embed_dim, kEmbeddingStd, rng);
  p.encoder = make_encoder(cfg.embed_dim, cfg.pe_dim, rng);
  const Index dh = cfg.head_dim();
  for (std::size_t l = 0; l < cfg.count(LayerKind::transformer); ++l) {
    AttentionWeights<Matrix> a;
    for (Index h = 0; h < cfg.heads; ++h) {
      a.wq.push_back(xavier_uniform(cfg.embed_dim, dh, rng));
      a.wk.push_back(xavier_uniform(cfg.embed_dim, dh, rng));
      a.wv.push_back(xavier_uniform(cfg.embed_dim, dh, rng));
    }
    a.wm = kOutputProjectionGain * xavier_uniform(cfg.heads * dh, cfg.embed_dim, rng);
    p.attention.push_back(std::move(a));
  }
  for (std::size_t l = 0; l < cfg.count(LayerKind::gnn); ++l) {
    p.sage.push_back(xavier_uniform(2 * cfg.embed_dim, cfg.embed_dim, rng));
  }
  return p;
}

std::vector<Matrix*> tensor_list(ModelParams& params) {
  std::vector<Matrix*> out;
  for_each_tensor(params, [&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

std::vector<std::string> tensor_names(const ModelParams& params) {
  std::vector<std::string> out;
  for_each_tensor(const_cast<ModelParams&>(params), [&](const std::string& name, Matrix&) { out.push_back(name); });
  return out;
}

}  // namespace tgnn
