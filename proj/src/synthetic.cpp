#include "tgnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <unordered_set>

#include "tgnn/sample_update.hpp"

namespace tgnn {

std::vector<Interaction> generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.clusters == 0 || cfg.items < cfg.clusters || cfg.users == 0) {
    throw ContractError("synthetic: need at least one user and one item per cluster");
  }
  if (cfg.min_interactions == 0 || cfg.min_interactions > cfg.max_interactions) {
    throw ContractError("synthetic: bad interaction count range");
  }
  Rng rng(cfg.seed);
  // Cumulative in-cluster weights by within-cluster rank.
  const std::size_t per_cluster = cfg.items / cfg.clusters;
  std::vector<double> cumulative(per_cluster);
  double total = 0.0;
  for (std::size_t r = 0; r < per_cluster; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);
    cumulative[r] = total;
  }

  std::vector<Interaction> rows;
  for (std::size_t u = 0; u < cfg.users; ++u) {
    const std::size_t cluster = u % cfg.clusters;
    const std::size_t span = cfg.max_interactions - cfg.min_interactions + 1;
    const std::size_t len = std::min(cfg.min_interactions + static_cast<std::size_t>(rng() % span), cfg.items);
    std::unordered_set<std::size_t> taken;
    std::int64_t ts = 1'600'000'000 + static_cast<std::int64_t>(rng() % 1'000'000);
    while (taken.size() < len) {
      std::size_t item;
      if (unit_draw(rng) < cfg.in_cluster) {
        const double x = unit_draw(rng) * total;
        const auto r = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) -
                                                cumulative.begin());
        item = std::min(r, per_cluster - 1) * cfg.clusters + cluster;
      } else {
        item = static_cast<std::size_t>(rng() % cfg.items);
      }
      if (!taken.insert(item).second) continue;
      ts += 1 + static_cast<std::int64_t>(rng() % 86'400);
      rows.push_back({static_cast<NodeId>(u), static_cast<NodeId>(item), ts});
    }
  }
  return rows;
}

InteractionGraph synthetic_graph(const SyntheticConfig& cfg) {
  const auto rows = generate_synthetic(cfg);
  return InteractionGraph::from_interactions(cfg.users, cfg.items, rows);
}

void write_synthetic_tsv(const SyntheticConfig& cfg, std::ostream& out) {
  out << "# synthetic planted-cluster interactions: users=" << cfg.users << " items=" << cfg.items
      << " clusters=" << cfg.clusters << " seed=" << cfg.seed << "\n";
  for (const auto& r : generate_synthetic(cfg)) out << r.user << '\t' << r.item << '\t' << r.timestamp << "\t1\n";
}

}  // namespace tgnn
