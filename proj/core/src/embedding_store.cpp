#include "emoprobe/embedding_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "emoprobe/corpus.hpp"
#include "emoprobe/errors.hpp"
#include "json.hpp"

namespace emoprobe {

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'M', 'B', 'D'};
constexpr std::uint8_t kDtypeFloat32 = 0;

template <typename T>
void put_le(std::string& buf, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const unsigned char* p) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    value |= static_cast<T>(p[i]) << (8 * i);
  }
  return value;
}

}  // namespace

std::size_t LabeledMatrix::find(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return i;
  }
  return npos;
}

std::size_t write_matrix(const EmbeddingMatrix& matrix,
                         std::span<const std::string> manifest,
                         std::ostream& matrix_out, std::ostream& manifest_out) {
  if (manifest.size() != matrix.count) {
    throw AlignmentError("manifest has " + std::to_string(manifest.size()) +
                         " ids but matrix has " + std::to_string(matrix.count) +
                         " rows");
  }
  if (matrix.values.size() != matrix.count * matrix.dim) {
    throw FormatError("matrix value buffer does not match count x dim");
  }
  if (matrix.dim == 0) throw FormatError("matrix dim must be >= 1");
  if (matrix.dim > UINT32_MAX) throw FormatError("matrix dim exceeds u32");
  for (const auto& id : manifest) {
    if (id.find_first_of("\r\n") != std::string::npos) {
      throw FormatError("manifest id contains a line break: '" + id + "'");
    }
  }

  std::string buf;
  buf.reserve(kMatrixHeaderBytes + matrix.values.size() * 4);
  buf.append(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(buf, kMatrixFormatVersion);
  put_le<std::uint64_t>(buf, matrix.count);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(matrix.dim));
  put_le<std::uint8_t>(buf, kDtypeFloat32);
  buf.append(3, '\0');
  for (float v : matrix.values) {
    if (!std::isfinite(v)) throw FormatError("refusing to write non-finite value");
    put_le<std::uint32_t>(buf, std::bit_cast<std::uint32_t>(v));
  }
  matrix_out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  for (const auto& id : manifest) manifest_out << id << '\n';
  if (!matrix_out || !manifest_out) throw IoError("write failed for embedding matrix");
  return buf.size();
}

LabeledMatrix read_matrix(std::istream& matrix_in, std::istream& manifest_in) {
  std::array<unsigned char, kMatrixHeaderBytes> header{};
  matrix_in.read(reinterpret_cast<char*>(header.data()), header.size());
  const auto got = static_cast<std::size_t>(matrix_in.gcount());
  if (got >= 4 && std::memcmp(header.data(), kMagic.data(), 4) != 0) {
    throw FormatError("bad magic: not an EMBD matrix file");
  }
  if (got < kMatrixHeaderBytes) {
    throw FormatError("truncated header: expected " +
                      std::to_string(kMatrixHeaderBytes) + " bytes, got " +
                      std::to_string(got));
  }
  const auto version = get_le<std::uint32_t>(header.data() + 4);
  if (version != kMatrixFormatVersion) {
    throw FormatError("unsupported matrix format version " + std::to_string(version));
  }
  const auto count = get_le<std::uint64_t>(header.data() + 8);
  const auto dim = get_le<std::uint32_t>(header.data() + 16);
  const auto dtype = header[20];
  if (dtype != kDtypeFloat32) {
    throw FormatError("unsupported dtype " + std::to_string(dtype));
  }
  if (header[21] != 0 || header[22] != 0 || header[23] != 0) {
    throw FormatError("reserved header bytes are not zero");
  }
  if (dim == 0) throw FormatError("matrix dim must be >= 1");

  if (count > UINT64_MAX / 4 / dim) throw FormatError("declared matrix size overflows");
  const std::uint64_t expected = count * dim * 4;
  // Read in bounded chunks so a corrupt count cannot force a huge allocation.
  std::string payload;
  constexpr std::size_t kChunk = std::size_t{1} << 20;
  std::uint64_t actual = 0;
  while (actual < expected) {
    const auto want = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, expected - actual));
    const auto offset = payload.size();
    payload.resize(offset + want);
    matrix_in.read(payload.data() + offset, static_cast<std::streamsize>(want));
    const auto n = static_cast<std::size_t>(matrix_in.gcount());
    actual += n;
    if (n < want) break;
  }
  if (actual != expected) {
    throw FormatError("truncated payload: expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(actual));
  }

  LabeledMatrix out;
  out.matrix = EmbeddingMatrix(static_cast<std::size_t>(count), dim);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < out.matrix.values.size(); ++i) {
    const float v = std::bit_cast<float>(get_le<std::uint32_t>(p + 4 * i));
    if (!std::isfinite(v)) {
      throw FormatError("non-finite value at row " + std::to_string(i / dim) +
                        ", column " + std::to_string(i % dim));
    }
    out.matrix.values[i] = v;
  }

  std::string line;
  std::unordered_set<std::string> seen;
  while (std::getline(manifest_in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!seen.insert(line).second) {
      throw FormatError("duplicate manifest id '" + line + "'");
    }
    out.ids.push_back(std::move(line));
  }
  if (out.ids.size() != out.matrix.count) {
    throw AlignmentError("manifest lists " + std::to_string(out.ids.size()) +
                         " ids but matrix has " + std::to_string(out.matrix.count) +
                         " rows");
  }
  return out;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& matrix_path) {
  auto p = matrix_path;
  p.replace_extension(".ids");
  return p;
}

std::size_t save_matrix(const LabeledMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  std::ofstream manifest(manifest_path_for(path), std::ios::binary);
  if (!manifest) throw IoError("cannot write " + manifest_path_for(path).string());
  return write_matrix(m.matrix, m.ids, out, manifest);
}

LabeledMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix file " + path.string());
  const auto mpath = manifest_path_for(path);
  std::ifstream manifest(mpath, std::ios::binary);
  if (!manifest) throw IoError("cannot open manifest file " + mpath.string());
  try {
    return read_matrix(in, manifest);
  } catch (const FormatError& err) {
    throw FormatError(path.string() + ": " + err.what());
  }
}

void save_embedding_set(const EmbeddingSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_matrix(set.events, dir / "events.embd");
  save_matrix(set.labels, dir / "labels.embd");
  std::ofstream meta(dir / "embedding_set.json", std::ios::binary);
  if (!meta) throw IoError("cannot write " + (dir / "embedding_set.json").string());
  nlohmann::json doc{{"format_version", 1}, {"model_tag", set.model_tag}};
  meta << doc.dump(2) << '\n';
}

EmbeddingSet load_embedding_set(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("embedding set directory not found: " + dir.string());
  }
  EmbeddingSet set;
  set.events = load_matrix(dir / "events.embd");
  set.labels = load_matrix(dir / "labels.embd");
  const auto meta_path = dir / "embedding_set.json";
  if (std::filesystem::exists(meta_path)) {
    std::ifstream in(meta_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& err) {
      throw FormatError(meta_path.string() + ": " + err.what());
    }
    if (!doc.is_object() || doc.value("format_version", 0) != 1 ||
        !doc.contains("model_tag") || !doc.at("model_tag").is_string()) {
      throw FormatError(meta_path.string() +
                        ": expected format_version 1 and a string model_tag");
    }
    set.model_tag = doc.at("model_tag").get<std::string>();
  } else {
    set.model_tag = std::filesystem::absolute(dir).lexically_normal().filename().string();
    if (set.model_tag.empty()) {
      set.model_tag = std::filesystem::absolute(dir).parent_path().filename().string();
    }
  }
  return set;
}

std::string AlignmentReport::describe() const {
  std::ostringstream os;
  auto list = [&os](const char* title, const std::vector<std::string>& ids) {
    if (ids.empty()) return;
    os << title << " (" << ids.size() << "):";
    for (const auto& id : ids) os << ' ' << id;
    os << '\n';
  };
  list("missing event embeddings", missing_events);
  list("orphan event embeddings", orphan_events);
  list("missing label embeddings", missing_labels);
  if (!dims_match()) {
    os << "dimension mismatch: event dim " << event_dim << ", label dim "
       << label_dim << '\n';
  }
  if (ok()) os << "aligned: event dim " << event_dim << '\n';
  return os.str();
}

AlignmentReport validate_alignment(const EmbeddingSet& set, const Corpus& corpus) {
  AlignmentReport report;
  report.event_dim = set.events.matrix.dim;
  report.label_dim = set.labels.matrix.dim;

  std::unordered_set<std::string> set_ids(set.events.ids.begin(), set.events.ids.end());
  std::unordered_set<std::string> corpus_ids;
  for (const auto& e : corpus.events) {
    corpus_ids.insert(e.id);
    if (!set_ids.contains(e.id)) report.missing_events.push_back(e.id);
  }
  for (const auto& id : set.events.ids) {
    if (!corpus_ids.contains(id)) report.orphan_events.push_back(id);
  }
  std::unordered_set<std::string> labels(set.labels.ids.begin(), set.labels.ids.end());
  for (const auto& c : corpus.categories) {
    if (!labels.contains(c.name)) report.missing_labels.push_back(c.name);
  }
  return report;
}

void require_alignment(const EmbeddingSet& set, const Corpus& corpus) {
  const auto report = validate_alignment(set, corpus);
  if (!report.ok()) throw AlignmentError("alignment failed:\n" + report.describe());
}

}  // namespace emoprobe
