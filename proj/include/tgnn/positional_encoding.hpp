#pragma once

#include <cstdint>

#include "tgnn/attention_sampling.hpp"
#include "tgnn/mlp.hpp"
#include "tgnn/structural_features.hpp"
#include "tgnn/tape.hpp"

namespace tgnn {

/// The three scalar encoders (1 -> d_pe) and the fusion MLP
/// (d + 3 d_pe -> d).
template <typename T>
struct EncoderWeights {
  MlpWeights<T> spe, de, pre, comb;
};

template <typename T, typename F>
void for_each_tensor(EncoderWeights<T>& e, const std::string& prefix, F&& f) {
  for_each_tensor(e.spe, prefix + ".spe", f);
  for_each_tensor(e.de, prefix + ".de", f);
  for_each_tensor(e.pre, prefix + ".pre", f);
  for_each_tensor(e.comb, prefix + ".comb", f);
}

EncoderWeights<Matrix> make_encoder(Index embed_dim, Index pe_dim, Rng& rng);

// Scalar normalizations fed to the encoders.
inline double spe_input(std::uint32_t hop, std::uint32_t cap) { return static_cast<double>(hop) / cap; }
double de_input(std::uint32_t degree, std::uint32_t max_degree);
inline double pre_input(double pagerank, std::size_t num_nodes) { return pagerank * static_cast<double>(num_nodes); }

RowVector encode_spe(const MlpWeights<Matrix>& p, std::uint32_t hop, std::uint32_t cap);
RowVector encode_de(const MlpWeights<Matrix>& p, std::uint32_t degree, std::uint32_t max_degree);
RowVector encode_pre(const MlpWeights<Matrix>& p, double pagerank, std::size_t num_nodes);

/// comb(x | spe | de | pre).
RowVector fuse(const MlpWeights<Matrix>& comb, const RowVector& x, const RowVector& spe, const RowVector& de,
               const RowVector& pre);

/// Which encodings take part; a disabled block is fed as zeros.
struct EncodingToggles {
  bool spe = true;
  bool de = true;
  bool pre = true;
};

/// Structure-aware inputs of the first Transformer layer.
///
/// `centers` is N x d with row i = comb(x_i, SPE(i, i), DE(i), PRE(i)).
/// `contexts` is (N * per_center) x d, center-major: row i * per_center + r is
/// comb(x_j, SPE(i, j), DE(j), PRE(j)) for the r-th sample j of center i.
struct EnhancedInput {
  Var centers;
  Var contexts;
  Index per_center = 0;
};

EnhancedInput enhance_all(const EncoderWeights<Var>& enc, Var x, const AttentionSamples& samples,
                          const StructuralFeatures& features, const EncodingToggles& toggles = {},
                          double rate = 0.0, Rng* rng = nullptr);

struct EnhancedMatrices {
  Matrix centers;
  Matrix contexts;
};

EnhancedMatrices enhance_all(const EncoderWeights<Matrix>& enc, const Matrix& x, const AttentionSamples& samples,
                             const StructuralFeatures& features, const EncodingToggles& toggles = {});

}  // namespace tgnn
