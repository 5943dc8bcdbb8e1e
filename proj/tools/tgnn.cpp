#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "tgnn/checkpoint.hpp"
#include "tgnn/expressivity.hpp"
#include "tgnn/run_config.hpp"
#include "tgnn/synthetic.hpp"
#include "tgnn/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tgnn;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json macs_json(const MacCounter& c) {
  json j;
  for (std::size_t p = 0; p < kPhaseNames.size(); ++p) j[std::string(kPhaseNames[p])] = c.get(static_cast<Phase>(p));
  j["total"] = c.total();
  return j;
}

json metrics_json(const RankingMetrics& m) {
  json j;
  for (const auto& [n, r] : m.recall) j["recall@" + std::to_string(n)] = r;
  for (const auto& [n, v] : m.ndcg) j["ndcg@" + std::to_string(n)] = v;
  j["users_evaluated"] = m.users_evaluated;
  j["users_skipped"] = m.users_skipped;
  return j;
}

// Config file first, then TGNN_SEED, then explicit flags.
struct ConfigSource {
  std::string path;
  std::vector<std::string> overrides;

  RunConfig load() const {
    RunConfig cfg = path.empty() ? RunConfig{} : load_run_config(path);
    apply_environment(cfg);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("--set: expected key=value, got '" + kv + "'");
      set_run_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }
};

void add_config_flags(CLI::App* cmd, ConfigSource& src) {
  cmd->add_option("--config", src.path, "key=value run configuration");
  cmd->add_option("--set", src.overrides, "Override one config key (key=value), repeatable");
}

PrecomputeOptions precompute_options(const RunConfig& cfg, std::uint32_t cap) {
  PrecomputeOptions opts;
  opts.sampling = cfg.sampling;
  if (cfg.train.ablations.sampling) opts.sampling.mode = SamplingMode::structural;
  opts.cap = cap;
  return opts;
}

Precomputed run_precompute(const PreparedData& data, const RunConfig& cfg, std::uint32_t cap) {
  const std::size_t n = data.fit.num_nodes();
  if (n >= 2 && cfg.sampling.k > n - 1) {
    std::cerr << "warning: k=" << cfg.sampling.k << " exceeds N-1=" << n - 1 << "; samples truncated to " << n - 1
              << "\n";
  }
  return precompute(data.fit, cfg.model.embed_dim, cfg.train.seed, precompute_options(cfg, cap));
}

int cmd_ingest(const std::string& input, std::size_t min_user, std::size_t min_item, const std::string& out,
               const std::string& tsv) {
  const IngestResult r = ingest_file(input, min_user, min_item);
  save_graph(r.graph, fs::path(out));
  if (!tsv.empty()) {
    std::ofstream os(tsv);
    write_tsv(r.graph, os);
  }
  std::cout << "users=" << r.graph.num_users() << ", items=" << r.graph.num_items()
            << ", edges=" << r.graph.num_edges() << "\n";
  return 0;
}

int cmd_precompute(const std::string& graph_path, const RunConfig& cfg, std::uint32_t cap, const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  const PreparedData data = prepare_data(load_graph(fs::path(graph_path)));
  const Precomputed pre = run_precompute(data, cfg, cap);
  fs::create_directories(out);
  save_samples(pre.samples, {cfg.train.seed, static_cast<std::uint32_t>(cfg.model.embed_dim)},
               fs::path(out) / "samples.tgsm");
  save_features(pre.features, fs::path(out) / "features.tgpe");
  json j;
  j["nodes"] = data.fit.num_nodes();
  j["k"] = pre.samples.per_node();
  j["macs"] = macs_json(pre.macs);
  j["pagerank_converged"] = pre.features.pagerank_converged;
  std::cout << j.dump() << "\n";
  std::cerr << "precompute: " << seconds_since(start) << " s\n";
  return 0;
}

Precomputed load_precomputed(const std::string& dir, const PreparedData& data, const RunConfig& cfg) {
  Precomputed pre;
  SamplesProvenance prov;
  pre.samples = load_samples(fs::path(dir) / "samples.tgsm", &prov);
  pre.features = load_features(fs::path(dir) / "features.tgpe");
  if (pre.samples.num_nodes() != data.fit.num_nodes() || pre.features.degree.size() != data.fit.num_nodes()) {
    throw ArtifactError("precomputed artifacts in " + dir + " do not match the graph's node count");
  }
  if (prov.seed != cfg.train.seed || prov.embed_dim != static_cast<std::uint32_t>(cfg.model.embed_dim)) {
    throw ArtifactError("samples in " + dir + " were built with seed " + std::to_string(prov.seed) + ", embed_dim " +
                        std::to_string(prov.embed_dim) + "; the run uses seed " + std::to_string(cfg.train.seed) +
                        ", embed_dim " + std::to_string(cfg.model.embed_dim));
  }
  return pre;
}

int cmd_train(const std::string& graph_path, const RunConfig& cfg, const std::string& pre_dir, std::uint32_t cap,
              const std::string& out, const std::string& log_path) {
  const auto start = std::chrono::steady_clock::now();
  const PreparedData data = prepare_data(load_graph(fs::path(graph_path)));
  Precomputed pre = pre_dir.empty() ? run_precompute(data, cfg, cap) : load_precomputed(pre_dir, data, cfg);

  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw ArtifactError("cannot write " + log_path);
  }
  std::ostream& log = log_path.empty() ? std::cout : log_file;

  ModelConfig model = cfg.model;
  model.num_nodes = data.fit.num_nodes();
  const TrainResult result = train(cfg.train, model, data, std::move(pre), [&](const EpochRecord& r) {
    json j;
    j["epoch"] = r.epoch;
    j["loss"] = r.loss;
    j["pairs"] = r.pairs;
    j["val_recall@20"] = r.val_recall;
    j["samples_changed"] = r.samples_changed;
    log << j.dump() << "\n" << std::flush;
    std::cerr << "epoch " << r.epoch << "  loss " << r.loss << "  val recall@20 " << r.val_recall << "  ("
              << seconds_since(start) << " s)\n";
  });
  if (!out.empty()) save_checkpoint(result.best, fs::path(out));

  MacCounter eval_macs;
  const RankingMetrics test = evaluate_model(result.best, data, cfg.train.topn, &eval_macs);
  json j;
  j["event"] = "summary";
  j["best_epoch"] = result.report.best_epoch;
  j["epochs_run"] = result.report.epochs.size();
  j["ablate"] = to_string(cfg.train.ablations);
  j.update(metrics_json(test));
  j["flops"] = macs_json(result.report.flops);
  j["wall_seconds"] = seconds_since(start);
  log << j.dump() << "\n";
  std::cerr << "train: " << seconds_since(start) << " s\n";
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& graph_path, const std::vector<std::size_t>& topn) {
  const ModelState state = load_checkpoint(fs::path(model_path));
  const PreparedData data = prepare_data(load_graph(fs::path(graph_path)));
  if (state.model.num_nodes != data.fit.num_nodes()) {
    throw ArtifactError("checkpoint has " + std::to_string(state.model.num_nodes) + " nodes, graph has " +
                        std::to_string(data.fit.num_nodes()));
  }
  std::cout << metrics_json(evaluate_model(state, data, topn)).dump() << "\n";
  return 0;
}

std::string histogram_text(const std::map<std::uint64_t, std::size_t>& h) {
  std::string s = "{";
  for (const auto& [color, count] : h) s += (s.size() > 1 ? ", " : "") + std::to_string(color) + ": " + std::to_string(count);
  return s + "}";
}

std::string hops_text(const std::vector<std::vector<std::uint32_t>>& hops) {
  std::string s;
  for (const auto& row : hops) {
    s += "  [";
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? " " : "") + std::to_string(row[i]);
    s += "]\n";
  }
  return s;
}

int cmd_wl_demo(const std::string& graphs) {
  std::pair<Adjacency, Adjacency> pair;
  if (graphs.empty()) {
    pair = builtin_wl_pair();
    std::cout << "graphs: 6-cycle vs two disjoint triangles\n";
  } else {
    std::ifstream in(graphs);
    if (!in) throw ParseError("cannot open " + graphs);
    pair = parse_graph_pair(in);
    std::cout << "graphs: " << graphs << "\n";
  }
  const WlReport r = wl_distinguish_check(pair.first, pair.second);
  std::cout << "1-WL rounds: " << r.rounds << "\n"
            << "WL histogram A: " << histogram_text(r.histogram_a) << "\n"
            << "WL histogram B: " << histogram_text(r.histogram_b) << "\n"
            << "WL histograms equal: " << (r.wl_equal ? "yes" : "no") << "\n"
            << "hop multisets A:\n" << hops_text(r.hops_a)
            << "hop multisets B:\n" << hops_text(r.hops_b)
            << "hop multisets differ: " << (r.hops_differ ? "yes" : "no") << "\n"
            << (r.distinguishes() ? "RESULT: shortest-path encoding separates a 1-WL-equivalent pair\n"
                                  : "RESULT: pair not separated as expected\n");
  return r.distinguishes() ? 0 : 1;
}

int cmd_bench(const std::string& graph_path, const RunConfig& cfg, std::uint32_t cap,
              const std::vector<std::uint32_t>& sweep) {
  const PreparedData data = prepare_data(load_graph(fs::path(graph_path)));
  ModelConfig model = cfg.model;
  model.num_nodes = data.fit.num_nodes();
  const ModelParams params = init_model(model, cfg.train.seed);
  std::cout << "k,transformer_macs,update_macs,wall_seconds\n";
  for (std::uint32_t k : sweep) {
    RunConfig run = cfg;
    run.sampling.k = k;
    const Precomputed pre = run_precompute(data, run, cap);
    const GraphContext ctx = make_context(data.fit.adjacency(), pre.samples, pre.features);
    MacCounter macs;
    const auto start = std::chrono::steady_clock::now();
    const Matrix h = forward(params, model, ctx, cfg.train.ablations, &macs);
    message_passing_update(h, data.fit.adjacency(), pre.samples, &macs);
    std::cout << k << ',' << macs.get(Phase::transformer) << ',' << macs.get(Phase::update) << ','
              << seconds_since(start) << "\n";
  }
  return 0;
}

int cmd_synth(const SyntheticConfig& cfg, const std::string& out) {
  std::ofstream os(out);
  if (!os) throw ArtifactError("cannot write " + out);
  write_synthetic_tsv(cfg, os);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transformer/GNN hybrid recommender: ingest, precompute, train, evaluate, wl-demo, bench, synth"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--threads", threads, "Worker threads for dense kernels")->check(CLI::PositiveNumber);

  std::string input, out, tsv, graph, pre_dir, log_path, model_path, graphs;
  std::size_t min_user = 1, min_item = 1;
  std::uint32_t cap = 6;
  std::vector<std::size_t> topn{20, 40};
  std::vector<std::uint32_t> sweep{5, 10, 15, 20, 25, 30, 35};
  ConfigSource src;
  std::optional<std::uint32_t> k_flag;
  std::optional<double> alpha_flag;
  std::optional<std::uint64_t> seed_flag;
  SyntheticConfig synth;

  auto* ingest_cmd = app.add_subcommand("ingest", "Parse interactions into a graph artifact");
  ingest_cmd->add_option("--input", input, "Interaction file: user item timestamp [rating]")->required();
  ingest_cmd->add_option("--min-user", min_user, "Minimum interactions per user");
  ingest_cmd->add_option("--min-item", min_item, "Minimum interactions per item");
  ingest_cmd->add_option("--out", out, "Graph artifact path")->required();
  ingest_cmd->add_option("--tsv", tsv, "Also write the filtered, re-indexed interactions as TSV");

  auto* pre_cmd = app.add_subcommand("precompute", "Attention samples and structural features");
  pre_cmd->add_option("--graph", graph, "Graph artifact")->required();
  pre_cmd->add_option("--k", k_flag, "Attention samples per node (default from config: 10)");
  pre_cmd->add_option("--alpha", alpha_flag, "Similarity propagation weight (default from config: 0.5)");
  pre_cmd->add_option("--cap", cap, "Hop distance cap");
  pre_cmd->add_option("--seed", seed_flag, "Embedding seed (default from config: 2024)");
  pre_cmd->add_option("--out", out, "Output directory")->required();
  add_config_flags(pre_cmd, src);

  auto* train_cmd = app.add_subcommand("train", "Train and write a checkpoint");
  train_cmd->add_option("--graph", graph, "Graph artifact")->required();
  train_cmd->add_option("--pre", pre_dir, "Precompute directory (computed in-process when omitted)");
  train_cmd->add_option("--cap", cap, "Hop distance cap when computing in-process");
  train_cmd->add_option("--out", out, "Checkpoint path");
  train_cmd->add_option("--log", log_path, "JSON-lines metrics file (stdout when omitted)");
  add_config_flags(train_cmd, src);

  auto* eval_cmd = app.add_subcommand("evaluate", "All-rank test metrics of a checkpoint");
  eval_cmd->add_option("--model", model_path, "Checkpoint")->required();
  eval_cmd->add_option("--graph", graph, "Graph artifact the model was trained on")->required();
  eval_cmd->add_option("--topn", topn, "Cutoffs")->delimiter(',')->check(CLI::PositiveNumber);

  auto* wl_cmd = app.add_subcommand("wl-demo", "1-WL versus shortest-path hops on a graph pair");
  wl_cmd->add_option("--graphs", graphs, "Edge-list pair separated by '---' (builtin pair when omitted)");

  auto* bench_cmd = app.add_subcommand("bench", "MAC counts and time against sample count k");
  bench_cmd->add_option("--graph", graph, "Graph artifact")->required();
  bench_cmd->add_option("--k-sweep", sweep, "Sample counts")->delimiter(',')->check(CLI::PositiveNumber);
  bench_cmd->add_option("--cap", cap, "Hop distance cap");
  add_config_flags(bench_cmd, src);

  auto* synth_cmd = app.add_subcommand("synth", "Write the planted-cluster synthetic dataset as TSV");
  synth_cmd->add_option("--out", out, "TSV path")->required();
  synth_cmd->add_option("--users", synth.users, "Users");
  synth_cmd->add_option("--items", synth.items, "Items");
  synth_cmd->add_option("--clusters", synth.clusters, "Planted clusters");
  synth_cmd->add_option("--in-cluster", synth.in_cluster, "Probability an interaction stays in the user's cluster");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  Eigen::setNbThreads(threads);

  try {
    if (*ingest_cmd) return cmd_ingest(input, min_user, min_item, out, tsv);
    if (*wl_cmd) return cmd_wl_demo(graphs);
    if (*eval_cmd) return cmd_evaluate(model_path, graph, topn);
    if (*synth_cmd) return cmd_synth(synth, out);
    RunConfig cfg = src.load();
    if (k_flag) cfg.sampling.k = *k_flag;
    if (alpha_flag) cfg.sampling.alpha = *alpha_flag;
    if (seed_flag) cfg.train.seed = *seed_flag;
    if (*pre_cmd) return cmd_precompute(graph, cfg, cap, out);
    if (*train_cmd) return cmd_train(graph, cfg, pre_dir, cap, out, log_path);
    if (*bench_cmd) return cmd_bench(graph, cfg, cap, sweep);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const EmptyDataError& e) {
    std::cerr << "empty data: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric abort: " << e.what() << "\n";
    return 4;
  } catch (const ArtifactError& e) {
    std::cerr << "artifact error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
