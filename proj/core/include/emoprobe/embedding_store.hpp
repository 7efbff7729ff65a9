#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace emoprobe {

struct Corpus;

// Row-major float32 matrix of frozen language-model embeddings.
struct EmbeddingMatrix {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<float> values;  // count * dim

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t cols)
      : count(rows), dim(cols), values(rows * cols, 0.0f) {}

  std::span<const float> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  std::span<float> row(std::size_t i) { return {values.data() + i * dim, dim}; }

  bool operator==(const EmbeddingMatrix&) const = default;
};

// A matrix plus the manifest naming each row (row i <-> ids[i]).
struct LabeledMatrix {
  EmbeddingMatrix matrix;
  std::vector<std::string> ids;

  // Row index for `id`, or npos.
  std::size_t find(const std::string& id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool operator==(const LabeledMatrix&) const = default;
};

struct EmbeddingSet {
  LabeledMatrix events;  // rows named by event id
  LabeledMatrix labels;  // rows named by category name
  std::string model_tag;
};

// Binary layout (little-endian), 24-byte header:
//   "EMBD" | u32 version=1 | u64 count | u32 dim | u8 dtype=0 | 3 zero bytes
// followed by count*dim float32 values, row-major.
inline constexpr std::size_t kMatrixHeaderBytes = 24;
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

// Writes the matrix to `matrix_out` and one id per line to `manifest_out`.
// Returns the number of bytes written to `matrix_out`.
std::size_t write_matrix(const EmbeddingMatrix& matrix,
                         std::span<const std::string> manifest,
                         std::ostream& matrix_out, std::ostream& manifest_out);

// Reads what write_matrix produced. Rejects bad magic, unknown versions or
// dtypes, truncated payloads, non-finite values and duplicate manifest ids.
LabeledMatrix read_matrix(std::istream& matrix_in, std::istream& manifest_in);

// Manifest path for a matrix file: same stem with extension ".ids".
std::filesystem::path manifest_path_for(const std::filesystem::path& matrix_path);

std::size_t save_matrix(const LabeledMatrix& m, const std::filesystem::path& path);
LabeledMatrix load_matrix(const std::filesystem::path& path);

// Embedding-set directory layout:
//   events.embd / events.ids   rows per event id
//   labels.embd / labels.ids   rows per category name
//   embedding_set.json         {"format_version": 1, "model_tag": "..."} (optional)
// When embedding_set.json is absent the model tag is the directory name.
void save_embedding_set(const EmbeddingSet& set, const std::filesystem::path& dir);
EmbeddingSet load_embedding_set(const std::filesystem::path& dir);

struct AlignmentReport {
  std::vector<std::string> missing_events;  // in corpus, not in set
  std::vector<std::string> orphan_events;   // in set, not in corpus
  std::vector<std::string> missing_labels;  // declared category without a row
  std::size_t event_dim = 0;
  std::size_t label_dim = 0;

  bool dims_match() const { return event_dim == label_dim; }
  bool ok() const {
    return missing_events.empty() && orphan_events.empty() &&
           missing_labels.empty() && dims_match();
  }
  std::string describe() const;
};

AlignmentReport validate_alignment(const EmbeddingSet& set, const Corpus& corpus);

// Throws AlignmentError carrying describe() when the report does not pass.
void require_alignment(const EmbeddingSet& set, const Corpus& corpus);

}  // namespace emoprobe
