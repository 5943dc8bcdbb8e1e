#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Workspace {
 public:
  Workspace() : dir_(fs::temp_directory_path() / ("tgnn_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

  Run run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " '" TGNN_CLI_PATH "' " + args + " > '" + path("stdout") + "' 2> '" +
                            path("stderr") + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(path("stdout")), slurp(path("stderr"))};
  }

  /// Small synthetic graph artifact at g.tgnn.
  void make_graph() const {
    REQUIRE(run("synth --users 60 --items 90 --clusters 3 --out " + path("s.tsv")).code == 0);
    REQUIRE(run("ingest --input " + path("s.tsv") + " --out " + path("g.tgnn")).code == 0);
  }

 private:
  fs::path dir_;
};

nlohmann::json last_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  return nlohmann::json::parse(last);
}

}  // namespace

TEST_CASE("ingest prints a summary and reruns byte-identically") {
  Workspace w;
  w.write("f.tsv", "alice\tbook\t1\t5\nalice\tpen\t2\t3\nbob\tbook\t3\t4\n");
  const Run a = w.run("ingest --input " + w.path("f.tsv") + " --out " + w.path("a.tgnn"));
  CHECK(a.code == 0);
  CHECK(a.out == "users=2, items=2, edges=3\n");
  CHECK(w.run("ingest --input " + w.path("f.tsv") + " --out " + w.path("b.tgnn")).code == 0);
  CHECK(slurp(w.path("a.tgnn")) == slurp(w.path("b.tgnn")));
}

TEST_CASE("exit codes") {
  Workspace w;
  w.write("bad.tsv", "alice\tbook\tnot-a-time\n");
  CHECK(w.run("ingest --input " + w.path("bad.tsv") + " --out " + w.path("x.tgnn")).code == 2);
  w.write("one.tsv", "alice\tbook\t1\n");
  CHECK(w.run("ingest --input " + w.path("one.tsv") + " --min-user 2 --out " + w.path("x.tgnn")).code == 3);
  w.write("junk.tgnn", "definitely not a graph");
  CHECK(w.run("precompute --graph " + w.path("junk.tgnn") + " --out " + w.path("pre")).code == 5);
  CHECK(w.run("no-such-command").code == 2);
  w.make_graph();
  CHECK(w.run("evaluate --model m --graph " + w.path("g.tgnn") + " --topn 20,abc").code == 2);
  w.write("c.cfg", "lr = 0.01\nbogus = 1\n");
  const Run cfg = w.run("train --graph " + w.path("g.tgnn") + " --config " + w.path("c.cfg"));
  CHECK(cfg.code == 2);
  CHECK(cfg.err.find("line 2") != std::string::npos);
  const Run nan = w.run("train --graph " + w.path("g.tgnn") + " --set lr=1e300 --set epochs=3");
  CHECK(nan.code == 4);
  CHECK(nan.err.find("non-finite") != std::string::npos);
}

TEST_CASE("help lists every flag with its default") {
  Workspace w;
  const Run bench = w.run("bench --help");
  CHECK(bench.code == 0);
  CHECK(bench.out.find("--k-sweep") != std::string::npos);
  CHECK(bench.out.find("5,10,15,20,25,30,35") != std::string::npos);
  const Run ingest = w.run("ingest --help");
  CHECK(ingest.out.find("--min-user") != std::string::npos);
  CHECK(ingest.out.find("--min-item") != std::string::npos);
  for (const char* cmd : {"precompute", "train", "evaluate", "wl-demo", "synth"}) CHECK(w.run(std::string(cmd) + " --help").code == 0);
  const Run pre = w.run("precompute --help");
  CHECK(pre.out.find("--alpha") != std::string::npos);
  CHECK(pre.out.find("0.5") != std::string::npos);
}

TEST_CASE("precompute warns when k exceeds N-1 and respects TGNN_SEED provenance") {
  Workspace w;
  w.write("f.tsv", "a\tx\t1\na\ty\t2\nb\tx\t3\n");
  REQUIRE(w.run("ingest --input " + w.path("f.tsv") + " --out " + w.path("t.tgnn")).code == 0);
  const Run small = w.run("precompute --graph " + w.path("t.tgnn") + " --k 50 --out " + w.path("tp"));
  CHECK(small.code == 0);
  CHECK(small.err.find("warning") != std::string::npos);

  w.make_graph();
  REQUIRE(w.run("precompute --graph " + w.path("g.tgnn") + " --out " + w.path("p5"), "TGNN_SEED=5").code == 0);
  CHECK(w.run("train --graph " + w.path("g.tgnn") + " --pre " + w.path("p5") + " --set epochs=0", "TGNN_SEED=5").code == 0);
  const Run mismatch = w.run("train --graph " + w.path("g.tgnn") + " --pre " + w.path("p5") + " --set epochs=0");
  CHECK(mismatch.code == 5);
  CHECK(mismatch.err.find("seed 5") != std::string::npos);
  REQUIRE(w.run("precompute --graph " + w.path("g.tgnn") + " --out " + w.path("p5b"), "TGNN_SEED=5").code == 0);
  CHECK(slurp(w.path("p5/samples.tgsm")) == slurp(w.path("p5b/samples.tgsm")));
  CHECK(slurp(w.path("p5/features.tgpe")) == slurp(w.path("p5b/features.tgpe")));
}

TEST_CASE("train summary matches evaluate on the same checkpoint") {
  Workspace w;
  w.make_graph();
  const Run zero = w.run("train --graph " + w.path("g.tgnn") + " --set epochs=0");
  CHECK(zero.code == 0);
  const Run t = w.run("train --graph " + w.path("g.tgnn") + " --set epochs=2 --out " + w.path("m.tgmd"));
  REQUIRE(t.code == 0);
  const auto summary = last_json_line(t.out);
  CHECK(summary["event"] == "summary");
  for (const char* key : {"recall@20", "recall@40", "ndcg@20", "ndcg@40", "flops", "wall_seconds"}) {
    CHECK(summary.contains(key));
  }
  const Run e = w.run("evaluate --model " + w.path("m.tgmd") + " --graph " + w.path("g.tgnn") + " --topn 20,40");
  REQUIRE(e.code == 0);
  const auto metrics = nlohmann::json::parse(e.out);
  CHECK(metrics["recall@20"].get<double>() == summary["recall@20"].get<double>());
  CHECK(metrics["ndcg@40"].get<double>() == summary["ndcg@40"].get<double>());
}

TEST_CASE("transformer ablation runs through the config") {
  Workspace w;
  w.make_graph();
  const Run t = w.run("train --graph " + w.path("g.tgnn") + " --set epochs=1 --set ablate=Trans");
  REQUIRE(t.code == 0);
  const auto summary = last_json_line(t.out);
  CHECK(summary["ablate"] == "Trans");
  CHECK(summary["flops"]["transformer"] == 0);
}

TEST_CASE("wl-demo on the builtin pair and on user files") {
  Workspace w;
  const Run builtin = w.run("wl-demo");
  CHECK(builtin.code == 0);
  CHECK(builtin.out.find("WL histograms equal: yes") != std::string::npos);
  CHECK(builtin.out.find("hop multisets differ: yes") != std::string::npos);
  w.write("pair.txt", "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n---\n0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n");
  CHECK(w.run("wl-demo --graphs " + w.path("pair.txt")).code == 0);
  w.write("same.txt", "0 1\n1 2\n---\n0 1\n1 2\n");
  CHECK(w.run("wl-demo --graphs " + w.path("same.txt")).code == 1);
}

TEST_CASE("bench writes one CSV row per k") {
  Workspace w;
  w.make_graph();
  const Run b = w.run("bench --graph " + w.path("g.tgnn") + " --k-sweep 5,10,15");
  REQUIRE(b.code == 0);
  std::istringstream in(b.out);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "k,transformer_macs,update_macs,wall_seconds");
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  CHECK(rows == 3);
}
