#include "run_manifest.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "digest.hpp"
#include "emoprobe/errors.hpp"

namespace emoprobe::cli {

using nlohmann::json;

namespace {

json digests_to_json(const std::vector<FileDigest>& digests) {
  json arr = json::array();
  for (const auto& d : digests) {
    arr.push_back({{"role", d.role}, {"path", d.path}, {"sha256", d.sha256}});
  }
  return arr;
}

std::vector<FileDigest> digests_from_json(const json& arr) {
  std::vector<FileDigest> out;
  for (const auto& d : arr) {
    out.push_back({d.at("role").get<std::string>(), d.at("path").get<std::string>(),
                   d.at("sha256").get<std::string>()});
  }
  return out;
}

}  // namespace

void write_run_manifest(const RunManifest& m, const std::filesystem::path& path) {
  json doc{{"tool", "emoprobe"},
           {"tool_version", m.tool_version},
           {"subcommand", m.subcommand},
           {"config", m.config},
           {"seed", nullptr},
           {"inputs", digests_to_json(m.inputs)},
           {"outputs", digests_to_json(m.outputs)},
           {"created_at", m.created_at}};
  if (m.seed) doc["seed"] = *m.seed;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

RunManifest read_run_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run manifest " + path.string());
  try {
    const json doc = json::parse(in);
    RunManifest m;
    m.subcommand = doc.at("subcommand").get<std::string>();
    m.config = doc.at("config");
    if (!doc.at("seed").is_null()) m.seed = doc.at("seed").get<std::uint64_t>();
    m.inputs = digests_from_json(doc.at("inputs"));
    m.outputs = digests_from_json(doc.at("outputs"));
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.created_at = doc.at("created_at").get<std::string>();
    return m;
  } catch (const json::exception& err) {
    throw FormatError(path.string() + ": " + err.what());
  }
}

std::vector<FileDigest> digest_inputs(const std::string& role,
                                      const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<FileDigest> out;
    for (const auto& f : files) {
      const auto rel = fs::relative(f, path).generic_string();
      if (rel == kRunManifestName) continue;
      out.push_back({role + "/" + rel, f.string(), sha256_file(f)});
    }
    return out;
  }
  if (!fs::exists(path)) throw IoError("input not found: " + path.string());
  return {{role, path.string(), sha256_file(path)}};
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace emoprobe::cli
