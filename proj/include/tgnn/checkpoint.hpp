#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "tgnn/trainer.hpp"

namespace tgnn {

// Model checkpoint: "TGMD", version u8, node count u64, embed/pe/heads u32,
// stack and ablation strings, hop cap u32, epoch u64, PRNG state string,
// tensor count u32 then (name, rows u64, cols u64, f64 data) per tensor, then
// the current attention samples (k u32, per node u32, ids u32).
inline constexpr std::uint8_t kCheckpointVersion = 1;

void save_checkpoint(const ModelState& state, std::ostream& os);
ModelState load_checkpoint(std::istream& is);
void save_checkpoint(const ModelState& state, const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path);

}  // namespace tgnn
