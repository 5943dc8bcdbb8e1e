#include "tgnn/run_config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tgnn {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ParseError(key + ": cannot parse '" + value + "'");
  return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(key, trim(item)));
  if (out.empty()) throw ParseError(key + ": empty list");
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

void set_run_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& m = cfg.model;
  auto& t = cfg.train;
  try {
    if (key == "embed_dim") m.embed_dim = parse_number<Index>(key, value);
    else if (key == "pe_dim") m.pe_dim = parse_number<Index>(key, value);
    else if (key == "heads") m.heads = parse_number<Index>(key, value);
    else if (key == "stack") m.stack = parse_stack(value);
    else if (key == "k") cfg.sampling.k = parse_number<std::uint32_t>(key, value);
    else if (key == "alpha") cfg.sampling.alpha = parse_number<double>(key, value);
    else if (key == "walk_len") t.walk_len = parse_number<std::uint32_t>(key, value);
    else if (key == "update") t.update = parse_update_strategy(value);
    else if (key == "lr") t.lr = parse_number<double>(key, value);
    else if (key == "weight_decay") t.weight_decay = parse_number<double>(key, value);
    else if (key == "dropout") t.dropout = parse_number<double>(key, value);
    else if (key == "epochs") t.epochs = parse_number<std::size_t>(key, value);
    else if (key == "patience") t.patience = parse_number<std::size_t>(key, value);
    else if (key == "neg_per_pos") t.neg_per_pos = parse_number<std::size_t>(key, value);
    else if (key == "batch_users") t.batch_users = parse_number<std::size_t>(key, value);
    else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "topn") t.topn = parse_list(key, value);
    else if (key == "ablate") t.ablations = parse_ablations(value);
    else throw ParseError("unknown key '" + key + "'");
  } catch (const ContractError& e) {
    throw ParseError(key + ": " + e.what());
  }
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    try {
      set_run_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  return parse_run_config(in);
}

void apply_environment(RunConfig& cfg) {
  if (const char* seed = std::getenv("TGNN_SEED"); seed && *seed) {
    cfg.train.seed = parse_number<std::uint64_t>("TGNN_SEED", seed);
  }
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg) {
  const auto& m = cfg.model;
  const auto& t = cfg.train;
  return {
      {"embed_dim", std::to_string(m.embed_dim)},
      {"pe_dim", std::to_string(m.pe_dim)},
      {"heads", std::to_string(m.heads)},
      {"stack", to_string(m.stack)},
      {"k", std::to_string(cfg.sampling.k)},
      {"alpha", fmt(cfg.sampling.alpha)},
      {"walk_len", std::to_string(t.walk_len)},
      {"update", to_string(t.update)},
      {"lr", fmt(t.lr)},
      {"weight_decay", fmt(t.weight_decay)},
      {"dropout", fmt(t.dropout)},
      {"epochs", std::to_string(t.epochs)},
      {"patience", std::to_string(t.patience)},
      {"neg_per_pos", std::to_string(t.neg_per_pos)},
      {"batch_users", std::to_string(t.batch_users)},
      {"seed", std::to_string(t.seed)},
      {"topn", join(t.topn)},
      {"ablate", to_string(t.ablations)},
  };
}

}  // namespace tgnn
