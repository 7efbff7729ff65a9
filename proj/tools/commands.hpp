#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emoprobe/corpus.hpp"
#include "emoprobe/synthetic.hpp"
#include "emoprobe/train.hpp"

namespace emoprobe::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;  // validate: inputs are not aligned
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;  // parse, format, I/O, alignment
inline constexpr int kExitNumerical = 4;

// Environment variable naming the default output root when --out is absent.
inline constexpr const char* kOutputDirEnv = "EMOPROBE_OUTPUT_DIR";

struct SynthOptions {
  SyntheticConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct TrainOptions {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> categories;
  std::filesystem::path embeddings;
  TrainConfig config;
  std::filesystem::path out;
};

struct EvaluateOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> categories;
  std::filesystem::path embeddings;
  std::vector<std::size_t> ks = {3, 10, 50};
  Split split = Split::kTest;
  std::string timestamp = "unspecified";
  bool dump_rankings = false;
  std::filesystem::path out;
};

struct ValidateOptions {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> categories;
  std::filesystem::path embeddings;
};

struct SummarizeOptions {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> categories;
};

struct MergeOptions {
  std::vector<std::filesystem::path> reports;
  std::filesystem::path out;
};

struct RerunOptions {
  std::filesystem::path manifest;
  std::filesystem::path out;
};

// Each command writes its outputs plus run_manifest.json and returns an
// exit code. Library errors propagate as exceptions; run_guarded maps them.
int cmd_synth(const SynthOptions& opts, std::ostream& out);
int cmd_train(const TrainOptions& opts, std::ostream& out);
int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out);
int cmd_validate(const ValidateOptions& opts, std::ostream& out);
int cmd_summarize(const SummarizeOptions& opts, std::ostream& out);
int cmd_merge(const MergeOptions& opts, std::ostream& out);
// Re-executes the command recorded in a run manifest into a new directory
// after checking that every input still has its recorded digest.
int cmd_rerun(const RerunOptions& opts, std::ostream& out);

int exit_code_for(const std::exception& e);

// Digest over the files that make up a checkpoint; used as checkpoint_ref.
std::string checkpoint_digest(const std::filesystem::path& dir);

// --out when given, else $EMOPROBE_OUTPUT_DIR/<subcommand>. Throws
// ConfigError("out", ...) when neither is available.
std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& out,
                                      const std::string& subcommand);

template <typename Fn>
int run_guarded(Fn&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace emoprobe::cli
