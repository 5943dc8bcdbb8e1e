#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tgnn/trainer.hpp"

namespace tgnn {

/// Everything a training run is parameterized by.
struct RunConfig {
  ModelConfig model;
  SamplingOptions sampling;
  TrainConfig train;
};

/// `key = value` lines, `#` starts a comment. Unknown keys and malformed values
/// throw ParseError with the line number.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);
/// Sets one key on `cfg`; used by the parser and by CLI overrides.
void set_run_key(RunConfig& cfg, const std::string& key, const std::string& value);
/// Applies TGNN_SEED from the environment when set.
void apply_environment(RunConfig& cfg);

/// Key/default pairs in canonical order.
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg);

}  // namespace tgnn
