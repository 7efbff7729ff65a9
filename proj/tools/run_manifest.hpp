#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace emoprobe::cli {

struct FileDigest {
  std::string role;  // e.g. "corpus", "embeddings/events.embd", "report.json"
  std::string path;
  std::string sha256;

  bool operator==(const FileDigest&) const = default;
};

// Written next to every command's outputs. `config` holds the fully
// resolved options, enough to re-run the command without the original argv.
struct RunManifest {
  std::string subcommand;
  nlohmann::json config;
  std::optional<std::uint64_t> seed;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::string tool_version;
  std::string created_at;  // wall clock, informational only
};

inline constexpr const char* kRunManifestName = "run_manifest.json";

void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_run_manifest(const std::filesystem::path& path);

// Digest of one file, or of every regular file under a directory (sorted
// by relative path, role = "<role>/<relative path>").
std::vector<FileDigest> digest_inputs(const std::string& role,
                                      const std::filesystem::path& path);

std::string utc_now_iso8601();

}  // namespace emoprobe::cli
