#include "tgnn/positional_encoding.hpp"

#include <cmath>

namespace tgnn {

EncoderWeights<Matrix> make_encoder(Index embed_dim, Index pe_dim, Rng& rng) {
  EncoderWeights<Matrix> e;
  e.spe = make_mlp(1, pe_dim, pe_dim, rng);
  e.de = make_mlp(1, pe_dim, pe_dim, rng);
  e.pre = make_mlp(1, pe_dim, pe_dim, rng);
  e.comb = make_mlp(embed_dim + 3 * pe_dim, embed_dim, embed_dim, rng);
  return e;
}

double de_input(std::uint32_t degree, std::uint32_t max_degree) {
  if (max_degree == 0) return 0.0;
  return std::log1p(static_cast<double>(degree)) / std::log1p(static_cast<double>(max_degree));
}

namespace {

RowVector scalar_mlp(const MlpWeights<Matrix>& p, double input) {
  Matrix in(1, 1);
  in(0, 0) = input;
  return mlp_forward(p, in).row(0);
}

}  // namespace

RowVector encode_spe(const MlpWeights<Matrix>& p, std::uint32_t hop, std::uint32_t cap) {
  return scalar_mlp(p, spe_input(hop, cap));
}

RowVector encode_de(const MlpWeights<Matrix>& p, std::uint32_t degree, std::uint32_t max_degree) {
  return scalar_mlp(p, de_input(degree, max_degree));
}

RowVector encode_pre(const MlpWeights<Matrix>& p, double pagerank, std::size_t num_nodes) {
  return scalar_mlp(p, pre_input(pagerank, num_nodes));
}

RowVector fuse(const MlpWeights<Matrix>& comb, const RowVector& x, const RowVector& spe, const RowVector& de,
               const RowVector& pre) {
  RowVector cat(x.size() + spe.size() + de.size() + pre.size());
  cat << x, spe, de, pre;
  return mlp_forward(comb, cat).row(0);
}

namespace {

/// Row layout shared by both enhance_all variants: N center rows followed by
/// N * per_center context rows.
struct Layout {
  std::vector<Index> node;  // node whose raw attributes / degree / PageRank feed the row
  std::vector<Index> hop;   // hop value feeding SPE
};

Layout make_layout(const AttentionSamples& samples, const StructuralFeatures& features) {
  const std::size_t n = samples.num_nodes();
  const std::size_t s = samples.per_node();
  if (features.num_nodes() != n || features.pagerank.size() != n) {
    throw ShapeError("enhance_all: features cover " + std::to_string(features.num_nodes()) + " nodes, samples " +
                     std::to_string(n));
  }
  Layout l;
  l.node.reserve(n * (1 + s));
  l.hop.reserve(n * (1 + s));
  for (NodeId i = 0; i < n; ++i) {
    l.node.push_back(i);
    l.hop.push_back(0);
  }
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : samples.of(i)) {
      l.node.push_back(j);
      l.hop.push_back(features.hop(i, j));
    }
  }
  return l;
}

Matrix hop_inputs(std::uint32_t cap) {
  Matrix in(cap + 2, 1);
  for (std::uint32_t h = 0; h <= cap + 1; ++h) in(h, 0) = spe_input(h, cap);
  return in;
}

Matrix node_inputs(const StructuralFeatures& f, bool degree) {
  const std::size_t n = f.num_nodes();
  Matrix in(static_cast<Index>(n), 1);
  const std::uint32_t max_deg = f.max_degree();
  for (std::size_t v = 0; v < n; ++v) {
    in(static_cast<Index>(v), 0) = degree ? de_input(f.degree[v], max_deg) : pre_input(f.pagerank[v], n);
  }
  return in;
}

}  // namespace

EnhancedInput enhance_all(const EncoderWeights<Var>& enc, Var x, const AttentionSamples& samples,
                          const StructuralFeatures& features, const EncodingToggles& toggles, double rate,
                          Rng* rng) {
  Tape& tape = *x.tape;
  const Index n = static_cast<Index>(samples.num_nodes());
  const Index s = static_cast<Index>(samples.per_node());
  if (x.rows() != n) throw ShapeError("enhance_all: attributes " + shape_of(x.value()) + " for " + std::to_string(n) + " nodes");
  const Index pe = enc.spe.w2.cols();
  const Layout layout = make_layout(samples, features);
  const Index rows = static_cast<Index>(layout.node.size());

  // Encoders run once per distinct scalar and are gathered into the row layout.
  auto zeros = [&] { return tape.constant(Matrix::Zero(rows, pe)); };
  Var spe = toggles.spe ? gather_rows(mlp_forward(enc.spe, tape.constant(hop_inputs(features.cap))), layout.hop) : zeros();
  Var de = toggles.de ? gather_rows(mlp_forward(enc.de, tape.constant(node_inputs(features, true))), layout.node) : zeros();
  Var pre = toggles.pre ? gather_rows(mlp_forward(enc.pre, tape.constant(node_inputs(features, false))), layout.node) : zeros();
  const Var parts[] = {gather_rows(x, layout.node), spe, de, pre};
  Var fused = mlp_forward(enc.comb, concat_cols(parts), rate, rng);
  return {slice_rows(fused, 0, n), slice_rows(fused, n, n * s), s};
}

EnhancedMatrices enhance_all(const EncoderWeights<Matrix>& enc, const Matrix& x, const AttentionSamples& samples,
                             const StructuralFeatures& features, const EncodingToggles& toggles) {
  const Index n = static_cast<Index>(samples.num_nodes());
  if (x.rows() != n) throw ShapeError("enhance_all: attributes " + shape_of(x) + " for " + std::to_string(n) + " nodes");
  const Layout layout = make_layout(samples, features);
  const Index pe = enc.spe.w2.cols();
  const Matrix spe_table = mlp_forward(enc.spe, hop_inputs(features.cap));
  const Matrix de_table = mlp_forward(enc.de, node_inputs(features, true));
  const Matrix pre_table = mlp_forward(enc.pre, node_inputs(features, false));
  Matrix cat = Matrix::Zero(static_cast<Index>(layout.node.size()), x.cols() + 3 * pe);
  for (Index r = 0; r < cat.rows(); ++r) {
    const Index v = layout.node[static_cast<std::size_t>(r)];
    cat.row(r).head(x.cols()) = x.row(v);
    if (toggles.spe) cat.row(r).segment(x.cols(), pe) = spe_table.row(layout.hop[static_cast<std::size_t>(r)]);
    if (toggles.de) cat.row(r).segment(x.cols() + pe, pe) = de_table.row(v);
    if (toggles.pre) cat.row(r).segment(x.cols() + 2 * pe, pe) = pre_table.row(v);
  }
  Matrix fused = mlp_forward(enc.comb, cat);
  EnhancedMatrices out;
  out.centers = fused.topRows(n);
  out.contexts = fused.bottomRows(fused.rows() - n);
  return out;
}

}  // namespace tgnn
