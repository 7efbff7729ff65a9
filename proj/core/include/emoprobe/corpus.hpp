#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emoprobe {

enum class Split { kTrain, kValid, kTest };

inline constexpr std::array<Split, 3> kAllSplits = {Split::kTrain, Split::kValid,
                                                    Split::kTest};

std::string_view to_string(Split split);
// Throws ConfigError for anything other than "train", "valid", "test".
Split parse_split(std::string_view text);

struct EmotionCategory {
  std::string name;        // short lowercase token, e.g. "joy"
  std::string label_text;  // string handed to the embedding extractor

  bool operator==(const EmotionCategory&) const = default;
};

struct EmotionalEvent {
  std::string id;
  std::string text;
  std::string emotion;
  bool explicit_flag = false;
  Split split = Split::kTrain;

  bool operator==(const EmotionalEvent&) const = default;
};

// A validated corpus. Use make_corpus() or the parsers to obtain one; they
// enforce unique ids, declared categories and non-empty text.
struct Corpus {
  std::vector<EmotionCategory> categories;
  std::vector<EmotionalEvent> events;
  std::string source_tag;

  bool operator==(const Corpus&) const = default;

  const EmotionCategory* find_category(std::string_view name) const;
  std::vector<const EmotionalEvent*> events_in(Split split) const;
};

// Validates and returns the corpus. Throws ParseError (line = event index+1)
// on the first violation.
Corpus make_corpus(std::vector<EmotionCategory> categories,
                   std::vector<EmotionalEvent> events, std::string source_tag);

// Category sidecar document:
//   {"source_tag": "...", "categories": [{"name": "joy", "label_text": "Joy"}]}
struct CategoryDeclaration {
  std::string source_tag;
  std::vector<EmotionCategory> categories;
};

CategoryDeclaration parse_categories(std::istream& in);
void serialize_categories(const CategoryDeclaration& decl, std::ostream& out);

// Parses one JSON object per line with exactly the fields id, text, emotion,
// explicit, split. Blank lines are skipped. When `declared` is absent the
// categories are taken from the events in order of first appearance with
// label_text equal to the name.
Corpus parse_corpus(std::istream& in,
                    const std::optional<CategoryDeclaration>& declared,
                    std::string default_source_tag = "unnamed");

// Writes the events as JSON lines in corpus order.
void serialize_corpus(const Corpus& corpus, std::ostream& events_out);

Corpus read_corpus(const std::filesystem::path& events_path,
                   const std::optional<std::filesystem::path>& categories_path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& events_path,
                  const std::filesystem::path& categories_path);

struct DistributionRow {
  std::string category;
  std::array<std::size_t, 3> per_split{};  // indexed by Split
  std::size_t total = 0;
  std::size_t explicit_count = 0;

  bool operator==(const DistributionRow&) const = default;
};

struct DistributionSummary {
  std::vector<DistributionRow> rows;  // category declaration order
  DistributionRow totals;             // category == "total"

  const DistributionRow* row(std::string_view category) const;
  bool operator==(const DistributionSummary&) const = default;
};

DistributionSummary distribution_summary(const Corpus& corpus);

// Plain-text table: category, train, valid, test, total, explicit.
std::string render_distribution(const DistributionSummary& summary);

}  // namespace emoprobe
