#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "digest.hpp"
#include "doctest.h"
#include "emoprobe/embedding_store.hpp"
#include "emoprobe/errors.hpp"
#include "emoprobe/report.hpp"
#include "run_manifest.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

Result run(const std::string& args) {
  const std::string cmd = std::string(EMOPROBE_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("emoprobe_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Small separable corpus under dir/data.
fs::path synth(const fs::path& dir, const std::string& extra = "") {
  const auto data = dir / "data";
  const auto r = run("synth --categories 3 --per-category 30 --dim 8 --separation 10 --seed 5 --out " +
                     q(data) + " " + extra);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  return data;
}

std::string data_args(const fs::path& data) {
  return "--corpus " + q(data / "corpus.jsonl") + " --categories " + q(data / "categories.json") +
         " --embeddings " + q(data / "embeddings");
}

}  // namespace

TEST_CASE("synth writes the expected files deterministically") {
  const auto dir = scratch("synth");
  const auto data = synth(dir);
  for (const char* f : {"corpus.jsonl", "categories.json", "embeddings/events.embd",
                        "embeddings/events.ids", "embeddings/labels.embd", "embeddings/labels.ids",
                        "embeddings/embedding_set.json", "run_manifest.json"}) {
    CHECK_MESSAGE(fs::exists(data / f), f);
  }
  const auto again = dir / "again";
  REQUIRE(run("synth --categories 3 --per-category 30 --dim 8 --separation 10 --seed 5 --out " +
              q(again)).code == 0);
  for (const char* f : {"corpus.jsonl", "categories.json", "embeddings/events.embd",
                        "embeddings/labels.embd"}) {
    CHECK(emoprobe::cli::sha256_file(data / f) == emoprobe::cli::sha256_file(again / f));
  }
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch("usage");
  CHECK(run("synth --per-category 0 --seed 1 --out " + q(dir / "x")).code == 2);
  CHECK(run("synth --out " + q(dir / "x")).code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("synth --seed 1 --split-ratios 0.5,0.5 --out " + q(dir / "x")).code == 2);
  CHECK(run("synth --seed 1 --duplicate-fraction 1.5 --out " + q(dir / "x")).code == 2);
  CHECK(run("--help").code == 0);
  fs::remove_all(dir);
}

TEST_CASE("missing or misaligned inputs exit with 3") {
  const auto dir = scratch("inputs");
  const auto data = synth(dir);
  const auto missing = dir / "nowhere";
  auto r = run("train --corpus " + q(data / "corpus.jsonl") + " --embeddings " + q(missing) +
               " --seed 1 --out " + q(dir / "ckpt"));
  CHECK(r.code == 3);
  CHECK(r.output.find(missing.string()) != std::string::npos);

  CHECK(run("validate " + data_args(data)).code == 0);

  // Drop one event row: validate reports the finding.
  auto set = emoprobe::load_embedding_set(data / "embeddings");
  const auto bad = dir / "bad_embeddings";
  auto trimmed = set;
  trimmed.events.ids.pop_back();
  trimmed.events.matrix.count -= 1;
  trimmed.events.matrix.values.resize(trimmed.events.matrix.count * trimmed.events.matrix.dim);
  emoprobe::save_embedding_set(trimmed, bad);
  r = run("validate --corpus " + q(data / "corpus.jsonl") + " --embeddings " + q(bad));
  CHECK(r.code == 1);
  CHECK(r.output.find(set.events.ids.back()) != std::string::npos);

  // Label dimension differs from event dimension: both sizes are named.
  auto wide = set;
  wide.labels.matrix = emoprobe::EmbeddingMatrix(wide.labels.matrix.count, 12);
  const auto wide_dir = dir / "wide_embeddings";
  emoprobe::save_embedding_set(wide, wide_dir);
  r = run("train --corpus " + q(data / "corpus.jsonl") + " --embeddings " + q(wide_dir) +
          " --seed 1 --out " + q(dir / "ckpt"));
  CHECK(r.code == 3);
  CHECK(r.output.find("8") != std::string::npos);
  CHECK(r.output.find("12") != std::string::npos);

  std::ofstream(dir / "broken.jsonl") << "{\"id\": 1}\n";
  CHECK(run("summarize --corpus " + q(dir / "broken.jsonl")).code == 3);
  fs::remove_all(dir);
}

TEST_CASE("train, evaluate and rerun reproduce byte-identical outputs") {
  const auto dir = scratch("pipeline");
  const auto data = synth(dir);
  auto r = run("train " + data_args(data) + " --seed 3 --out " + q(dir / "ckpt"));
  REQUIRE_MESSAGE(r.code == 0, r.output);
  r = run("evaluate --checkpoint " + q(dir / "ckpt") + " " + data_args(data) +
          " --dump-rankings --out " + q(dir / "eval"));
  REQUIRE_MESSAGE(r.code == 0, r.output);
  for (const char* f : {"report.json", "report.tsv", "report.txt", "rankings.jsonl",
                        "run_manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / "eval" / f), f);
  }
  const auto report = emoprobe::parse_structured_report(slurp(dir / "eval" / "report.json"));
  CHECK(report.ks == std::vector<std::size_t>{3, 10, 50});
  CHECK(report.timestamp == "unspecified");
  CHECK(report.checkpoint_ref.rfind("sha256:", 0) == 0);

  r = run("evaluate --checkpoint " + q(dir / "ckpt") + " " + data_args(data) +
          " --dump-rankings --out " + q(dir / "eval2"));
  REQUIRE(r.code == 0);
  for (const char* f : {"report.json", "report.tsv", "report.txt", "rankings.jsonl"}) {
    CHECK(slurp(dir / "eval" / f) == slurp(dir / "eval2" / f));
  }

  r = run("rerun --manifest " + q(dir / "ckpt" / "run_manifest.json") + " --out " +
          q(dir / "ckpt_rerun"));
  REQUIRE_MESSAGE(r.code == 0, r.output);
  for (const char* f : {"metadata.json", "W1.embd", "W1.ids", "W2.embd", "W2.ids"}) {
    CHECK(slurp(dir / "ckpt" / f) == slurp(dir / "ckpt_rerun" / f));
  }
  r = run("rerun --manifest " + q(dir / "eval" / "run_manifest.json") + " --out " +
          q(dir / "eval_rerun"));
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(slurp(dir / "eval" / "report.json") == slurp(dir / "eval_rerun" / "report.json"));

  // A modified input is detected before anything runs.
  std::ofstream(data / "corpus.jsonl", std::ios::app) << "\n";
  r = run("rerun --manifest " + q(dir / "ckpt" / "run_manifest.json") + " --out " +
          q(dir / "ckpt_rerun2"));
  CHECK(r.code == 3);
  CHECK(r.output.find("corpus.jsonl") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("K of one on a single-event pool") {
  const auto dir = scratch("tiny");
  const auto data = dir / "data";
  REQUIRE(run("synth --categories 2 --per-category 10 --dim 4 --split-ratios 0.8,0.15,0.05 "
              "--seed 2 --out " + q(data)).code == 0);
  REQUIRE(run("train " + data_args(data) + " --seed 1 --max-epochs 5 --out " +
              q(dir / "ckpt")).code == 0);
  const auto r = run("evaluate --checkpoint " + q(dir / "ckpt") + " " + data_args(data) +
                     " --k 1 --out " + q(dir / "eval"));
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const auto report = emoprobe::parse_structured_report(slurp(dir / "eval" / "report.json"));
  CHECK(report.ks == std::vector<std::size_t>{1});
  fs::remove_all(dir);
}

TEST_CASE("merge and summarize") {
  const auto dir = scratch("merge");
  const auto data = synth(dir);
  REQUIRE(run("train " + data_args(data) + " --seed 1 --max-epochs 5 --out " +
              q(dir / "ckpt")).code == 0);
  REQUIRE(run("evaluate --checkpoint " + q(dir / "ckpt") + " " + data_args(data) + " --out " +
              q(dir / "eval")).code == 0);
  auto r = run("merge --report " + q(dir / "eval" / "report.json") + " --out " + q(dir / "cmp"));
  CHECK_MESSAGE(r.code == 0, r.output);
  CHECK(fs::exists(dir / "cmp" / "comparison.tsv"));
  r = run("merge --report " + q(dir / "eval" / "report.json") + " --report " +
          q(dir / "eval" / "report.json") + " --out " + q(dir / "cmp2"));
  CHECK(r.code != 0);

  r = run("summarize " + std::string("--corpus ") + q(data / "corpus.jsonl"));
  CHECK(r.code == 0);
  CHECK(r.output.find("joy") != std::string::npos);
  CHECK(r.output.find("total") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("output directory falls back to the environment") {
  CHECK_THROWS_AS(emoprobe::cli::resolve_out_dir(std::nullopt, "synth"), emoprobe::ConfigError);
  CHECK(emoprobe::cli::resolve_out_dir(fs::path("x"), "synth") == fs::path("x"));
  setenv(emoprobe::cli::kOutputDirEnv, "/tmp/root", 1);
  CHECK(emoprobe::cli::resolve_out_dir(std::nullopt, "train") == fs::path("/tmp/root/train"));
  unsetenv(emoprobe::cli::kOutputDirEnv);
}
