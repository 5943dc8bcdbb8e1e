#include "tgnn/checkpoint.hpp"

#include <fstream>

#include "tgnn/binary_io.hpp"

namespace tgnn {

void save_checkpoint(const ModelState& state, std::ostream& os) {
  io::write_header(os, "TGMD", kCheckpointVersion);
  io::write_u64(os, state.model.num_nodes);
  io::write_u32(os, static_cast<std::uint32_t>(state.model.embed_dim));
  io::write_u32(os, static_cast<std::uint32_t>(state.model.pe_dim));
  io::write_u32(os, static_cast<std::uint32_t>(state.model.heads));
  io::write_string(os, to_string(state.model.stack));
  io::write_string(os, to_string(state.ablations));
  io::write_u32(os, state.cap);
  io::write_u64(os, state.epoch);
  io::write_string(os, state.rng_state);

  std::uint32_t count = 0;
  for_each_tensor(const_cast<ModelParams&>(state.params), [&](const std::string&, Matrix&) { ++count; });
  io::write_u32(os, count);
  for_each_tensor(const_cast<ModelParams&>(state.params), [&](const std::string& name, Matrix& m) {
    io::write_string(os, name);
    io::write_u64(os, static_cast<std::uint64_t>(m.rows()));
    io::write_u64(os, static_cast<std::uint64_t>(m.cols()));
    for (Index i = 0; i < m.size(); ++i) io::write_f64(os, m.data()[i]);
  });

  io::write_u32(os, state.samples.k());
  io::write_u32(os, static_cast<std::uint32_t>(state.samples.per_node()));
  for (NodeId id : state.samples.flat()) io::write_u32(os, id);
}

ModelState load_checkpoint(std::istream& is) {
  io::read_header(is, "TGMD", kCheckpointVersion);
  ModelState s;
  s.model.num_nodes = io::read_u64(is);
  s.model.embed_dim = io::read_u32(is);
  s.model.pe_dim = io::read_u32(is);
  s.model.heads = io::read_u32(is);
  try {
    s.model.stack = parse_stack(io::read_string(is));
    s.ablations = parse_ablations(io::read_string(is));
    s.model.validate();
  } catch (const std::exception& e) {
    throw ArtifactError(std::string("checkpoint: ") + e.what());
  }
  if (s.model.num_nodes > (1ull << 31)) throw ArtifactError("checkpoint: implausible node count");
  s.cap = io::read_u32(is);
  s.epoch = io::read_u64(is);
  s.rng_state = io::read_string(is);

  s.params = init_model(s.model, 0);
  std::uint32_t expected = 0;
  for_each_tensor(s.params, [&](const std::string&, Matrix&) { ++expected; });
  const std::uint32_t count = io::read_u32(is);
  if (count != expected) {
    throw ArtifactError("checkpoint: " + std::to_string(count) + " tensors, layout expects " + std::to_string(expected));
  }
  for_each_tensor(s.params, [&](const std::string& name, Matrix& m) {
    const std::string got = io::read_string(is);
    const auto rows = io::read_u64(is);
    const auto cols = io::read_u64(is);
    if (got != name || rows != static_cast<std::uint64_t>(m.rows()) || cols != static_cast<std::uint64_t>(m.cols())) {
      throw ArtifactError("checkpoint: tensor '" + got + "' " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " does not match expected '" + name + "' " + shape_of(m));
    }
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = io::read_f64(is);
  });

  const std::uint32_t k = io::read_u32(is);
  const std::uint32_t per_node = io::read_u32(is);
  if (k == 0) throw ArtifactError("checkpoint: samples with k = 0");
  s.samples = AttentionSamples(k, s.model.num_nodes);
  if (per_node != s.samples.per_node()) throw ArtifactError("checkpoint: sample list length mismatch");
  for (NodeId v = 0; v < s.model.num_nodes; ++v) {
    for (auto& id : s.samples.of(v)) id = io::read_u32(is);
  }
  try {
    s.samples.validate();
  } catch (const ContractError& e) {
    throw ArtifactError(std::string("checkpoint: ") + e.what());
  }
  return s;
}

void save_checkpoint(const ModelState& state, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArtifactError("cannot write " + path.string());
  save_checkpoint(state, os);
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArtifactError("cannot read " + path.string());
  return load_checkpoint(is);
}

}  // namespace tgnn
