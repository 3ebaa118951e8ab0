#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "embedkit/dataset.hpp"
#include "embedkit/io.hpp"
#include "embedkit/rng.hpp"
#include "httplib.h"

using namespace embedkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* cli_path() { return EMBEDKIT_CLI_PATH; }

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = fs::temp_directory_path() /
           ("embedkit_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, const std::string& log_path) {
  const std::string command =
      std::string(cli_path()) + " " + args + " >" + log_path + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Two separable classes plus per-sample texts; class "synthetic" texts carry
// two of the stackexchange preset phrases. The class shift is spread across
// every dimension so it survives per-dimension standardization.
void write_corpus(const std::string& embeddings_path, const std::string& texts_path,
                  int per_class, int dims, double shift, std::uint64_t seed) {
  Rng rng(seed);
  std::ofstream emb(embeddings_path);
  std::ofstream txt(texts_path);
  const double per_dim = shift / std::sqrt(static_cast<double>(dims));
  for (int i = 0; i < 2 * per_class; ++i) {
    const bool synthetic = i >= per_class;
    json vec = json::array();
    for (int j = 0; j < dims; ++j) {
      vec.push_back(rng.next_normal() + (synthetic ? per_dim : -per_dim));
    }
    const std::string id = "s" + std::to_string(i);
    const std::string label = synthetic ? "synthetic" : "real";
    emb << json{{"id", id}, {"label", label}, {"vector", vec}} << "\n";
    const std::string text =
        synthetic ? "I apologize for the confusion. Hope this helps!"
                  : "The measurements were recorded at dawn.";
    txt << json{{"id", id}, {"label", label}, {"text", text}} << "\n";
  }
}

}  // namespace

TEST_CASE("pca command writes scores, scree and a reproducible report") {
  TempDir tmp;
  write_corpus(tmp.file("e.jsonl"), tmp.file("t.jsonl"), 30, 5, 3.0, 1);

  const std::string out1 = tmp.file("out1");
  const std::string args = "pca --embeddings " + tmp.file("e.jsonl") +
                           " --components 3 --standardize --seed 7 --deterministic";
  CHECK(run_cli(args + " --out " + out1, tmp.file("log1")) == 0);
  CHECK(fs::exists(out1 + "/pca_scores.csv"));
  CHECK(fs::exists(out1 + "/scree.csv"));
  CHECK(fs::exists(out1 + "/report.json"));

  const json report = json::parse(slurp(out1 + "/report.json"));
  CHECK(report["command"] == "pca");
  CHECK(report["seed"] == 7);
  CHECK(report["results"]["components_kept"] == 3);
  CHECK(report["inputs"]["embeddings"].contains("fnv1a64"));
  CHECK_FALSE(report.contains("created_at"));

  const std::string scores = slurp(out1 + "/pca_scores.csv");
  CHECK(scores.rfind("id,label,pc1,pc2,pc3", 0) == 0);

  // Byte-identical on a second run.
  const std::string out2 = tmp.file("out2");
  CHECK(run_cli(args + " --out " + out2, tmp.file("log2")) == 0);
  CHECK(slurp(out1 + "/report.json") == slurp(out2 + "/report.json"));
  CHECK(slurp(out1 + "/pca_scores.csv") == slurp(out2 + "/pca_scores.csv"));
  CHECK(slurp(out1 + "/scree.csv") == slurp(out2 + "/scree.csv"));
}

TEST_CASE("cli exit codes distinguish user errors") {
  TempDir tmp;
  // Missing file -> 2
  CHECK(run_cli("pca --embeddings " + tmp.file("missing.jsonl") + " --out " +
                    tmp.file("o"),
                tmp.file("log")) == 2);
  // Unknown subcommand -> 2
  CHECK(run_cli("frobnicate", tmp.file("log")) == 2);
  // Out-of-range components -> 2
  write_corpus(tmp.file("e.jsonl"), tmp.file("t.jsonl"), 5, 3, 1.0, 2);
  CHECK(run_cli("pca --embeddings " + tmp.file("e.jsonl") +
                    " --components 99 --out " + tmp.file("o2"),
                tmp.file("log")) == 2);
  // --help -> 0
  CHECK(run_cli("--help", tmp.file("log")) == 0);
}

TEST_CASE("lda command emits a confusion matrix consistent with the split") {
  TempDir tmp;
  // 10-class toy set, 12 samples per class, well separated.
  Rng rng(5);
  std::ofstream emb(tmp.file("e.jsonl"));
  for (int c = 0; c < 10; ++c) {
    for (int i = 0; i < 12; ++i) {
      json vec = json::array();
      for (int j = 0; j < 4; ++j) {
        vec.push_back(0.05 * rng.next_normal() + (j == c % 4 ? 3.0 * (c + 1) : 0.0));
      }
      emb << json{{"id", "c" + std::to_string(c) + "_" + std::to_string(i)},
                  {"label", "class" + std::to_string(c)},
                  {"vector", vec}}
          << "\n";
    }
  }
  emb.close();

  const std::string out = tmp.file("out");
  CHECK(run_cli("lda --embeddings " + tmp.file("e.jsonl") +
                    " --train-fraction 0.8 --seed 3 --deterministic --out " + out,
                tmp.file("log")) == 0);
  const json report = json::parse(slurp(out + "/report.json"));
  // round(0.8 * 12) = 10 train, 2 test per class
  CHECK(report["results"]["train_size"] == 100);
  CHECK(report["results"]["test_size"] == 20);
  const json counts = report["results"]["confusion"]["counts"];
  REQUIRE(counts.size() == 10);
  for (const json& row : counts) {
    int sum = 0;
    for (const json& v : row) sum += v.get<int>();
    CHECK(sum == 2);  // row sums equal per-class test counts
  }
  CHECK(fs::exists(out + "/confusion.csv"));
  CHECK(fs::exists(out + "/ld_scores.csv"));
}

TEST_CASE("regress command reports a strong fit on separable PC1") {
  TempDir tmp;
  write_corpus(tmp.file("e.jsonl"), tmp.file("t.jsonl"), 60, 6, 4.0, 9);
  const std::string out = tmp.file("out");
  CHECK(run_cli("regress --embeddings " + tmp.file("e.jsonl") +
                    " --standardize --pcs 1 --indicator-label synthetic "
                    "--seed 1 --deterministic --out " + out,
                tmp.file("log")) == 0);
  const json report = json::parse(slurp(out + "/report.json"));
  CHECK(report["results"]["regression"]["r_squared"].get<double>() > 0.9);
  CHECK(report["results"]["indicator"]["kind"] == "label");

  // Preset indicator over the texts file: the phrase rule flags the same rows.
  const std::string out2 = tmp.file("out2");
  CHECK(run_cli("regress --embeddings " + tmp.file("e.jsonl") +
                    " --standardize --pcs 1 --indicator-preset stackexchange-phrases"
                    " --texts " + tmp.file("t.jsonl") +
                    " --seed 1 --deterministic --out " + out2,
                tmp.file("log2")) == 0);
  const json report2 = json::parse(slurp(out2 + "/report.json"));
  CHECK(report2["results"]["regression"]["r_squared"].get<double>() > 0.9);
  CHECK(report2["results"]["indicator"]["min_hits"] == 2);

  // Multi-component regression uses the joint F test.
  const std::string out3 = tmp.file("out3");
  CHECK(run_cli("regress --embeddings " + tmp.file("e.jsonl") +
                    " --standardize --pcs 1,2 --indicator-label synthetic "
                    "--seed 1 --deterministic --out " + out3,
                tmp.file("log3")) == 0);
  const json report3 = json::parse(slurp(out3 + "/report.json"));
  CHECK(report3["results"]["regression"]["df_model"] == 2);

  // Text rules without --texts are a usage error.
  CHECK(run_cli("regress --embeddings " + tmp.file("e.jsonl") +
                    " --pcs 1 --indicator-preset stackexchange-phrases --out " +
                    tmp.file("out4"),
                tmp.file("log4")) == 2);
}

TEST_CASE("kde command writes a density grid") {
  TempDir tmp;
  write_corpus(tmp.file("e.jsonl"), tmp.file("t.jsonl"), 40, 4, 2.0, 11);
  const std::string out = tmp.file("out");
  CHECK(run_cli("kde --embeddings " + tmp.file("e.jsonl") +
                    " --pc 1 --grid-points 64 --seed 1 --deterministic --out " + out,
                tmp.file("log")) == 0);
  const std::string kde_csv = slurp(out + "/kde.csv");
  CHECK(kde_csv.rfind("x,all,real,synthetic", 0) == 0);
  std::size_t lines = 0;
  for (char ch : kde_csv) lines += ch == '\n';
  CHECK(lines == 65);  // header + 64 grid rows
}

TEST_CASE("detect command is byte-stable across runs and thread counts") {
  TempDir tmp;
  Rng rng(13);
  {
    std::ofstream ref(tmp.file("ref.jsonl"));
    for (int i = 0; i < 120; ++i) {
      json vec = json::array();
      for (int j = 0; j < 8; ++j) vec.push_back(rng.next_normal());
      ref << json{{"id", "r" + std::to_string(i)}, {"label", "real"}, {"vector", vec}}
          << "\n";
    }
    std::ofstream cont(tmp.file("cont.jsonl"));
    for (int i = 0; i < 25; ++i) {
      json vec = json::array();
      for (int j = 0; j < 8; ++j) vec.push_back(rng.next_normal() + (j == 3 ? 5.0 : 0.0));
      cont << json{{"id", "c" + std::to_string(i)}, {"label", "fake"}, {"vector", vec}}
           << "\n";
    }
  }
  const std::string base = "detect --reference " + tmp.file("ref.jsonl") +
                           " --contaminants " + tmp.file("cont.jsonl") +
                           " --n 40,80 --m 2,5 --n-pcs 4 --seeds 4 "
                           "--seed 21 --deterministic";
  const std::string out1 = tmp.file("o1"), out2 = tmp.file("o2"), out3 = tmp.file("o3");
  CHECK(run_cli(base + " --threads 1 --out " + out1, tmp.file("log1")) == 0);
  CHECK(run_cli(base + " --threads 1 --out " + out2, tmp.file("log2")) == 0);
  CHECK(run_cli(base + " --threads 4 --out " + out3, tmp.file("log3")) == 0);
  CHECK(slurp(out1 + "/auroc.csv") == slurp(out2 + "/auroc.csv"));
  CHECK(slurp(out1 + "/auroc.csv") == slurp(out3 + "/auroc.csv"));
  CHECK(slurp(out1 + "/report.json") == slurp(out2 + "/report.json"));
  CHECK(slurp(out1 + "/report.json") == slurp(out3 + "/report.json"));

  const std::string csv = slurp(out1 + "/auroc.csv");
  CHECK(csv.rfind("N,M,seed,n_trees,auroc", 0) == 0);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 1 + 2 * 2 * 4);
}

TEST_CASE("embed command round-trips through a stub service") {
  TempDir tmp;
  {
    std::ofstream txt(tmp.file("t.jsonl"));
    for (int i = 0; i < 5; ++i) {
      txt << json{{"id", "t" + std::to_string(i)},
                  {"label", "l"},
                  {"text", "text number " + std::to_string(i)}}
          << "\n";
    }
  }

  std::atomic<int> requests{0};
  httplib::Server server;
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    const json body = json::parse(req.body);
    json rows = json::array();
    for (const auto& text : body["texts"]) {
      const double tag = static_cast<double>(text.get<std::string>().back() - '0');
      rows.push_back({tag, 0.5, -1.25});
    }
    res.set_content(json{{"embeddings", rows}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string out_file = tmp.file("e.embx");
  const int code = run_cli("embed --texts " + tmp.file("t.jsonl") +
                               " --service-url http://127.0.0.1:" + std::to_string(port) +
                               " --batch-size 2 --out " + out_file,
                           tmp.file("log"));
  CHECK(code == 0);
  CHECK(requests.load() == 3);  // ceil(5 / 2)

  const LoadedEmbeddings loaded = load_embeddings(out_file, Format::packed_binary);
  CHECK(loaded.matrix.rows() == 5);
  CHECK(loaded.matrix.dims() == 3);
  for (int i = 0; i < 5; ++i) {
    CHECK(loaded.matrix.view()(i, 0) == static_cast<double>(i));
  }
  CHECK(loaded.dataset.labels() == std::vector<std::string>(5, "l"));

  // Missing token env var fails before any request reaches the stub.
  requests = 0;
  const int denied = run_cli("embed --texts " + tmp.file("t.jsonl") +
                                 " --service-url http://127.0.0.1:" + std::to_string(port) +
                                 " --token-env EMBEDKIT_CLI_TEST_NO_SUCH_TOKEN --out " +
                                 tmp.file("e2.embx"),
                             tmp.file("log2"));
  CHECK(denied == 2);
  CHECK(requests.load() == 0);

  server.stop();
  listener.join();
}
