#include "emoprobe/corpus.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "emoprobe/errors.hpp"
#include "json.hpp"

namespace emoprobe {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kValid:
      return "valid";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "valid") return Split::kValid;
  if (text == "test") return Split::kTest;
  throw ConfigError("split", "unknown split value '" + std::string(text) +
                                 "' (expected train, valid or test)");
}

const EmotionCategory* Corpus::find_category(std::string_view name) const {
  for (const auto& c : categories) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<const EmotionalEvent*> Corpus::events_in(Split split) const {
  std::vector<const EmotionalEvent*> out;
  for (const auto& e : events) {
    if (e.split == split) out.push_back(&e);
  }
  return out;
}

namespace {

void check_categories(const std::vector<EmotionCategory>& categories) {
  std::unordered_set<std::string> seen;
  for (const auto& c : categories) {
    if (c.name.empty()) throw ParseError(0, "category with empty name");
    if (c.label_text.empty()) {
      throw ParseError(0, "category '" + c.name + "' has empty label_text");
    }
    if (!seen.insert(c.name).second) {
      throw ParseError(0, "duplicate category '" + c.name + "'");
    }
  }
}

// Validates one event against what has been seen so far.
void check_event(const EmotionalEvent& e, std::size_t line,
                 const std::unordered_set<std::string>& category_names,
                 std::unordered_set<std::string>& ids) {
  if (e.id.empty()) throw ParseError(line, "empty id");
  if (e.text.empty()) throw ParseError(line, "empty text for id '" + e.id + "'");
  if (!category_names.contains(e.emotion)) {
    throw ParseError(line, "event '" + e.id + "' references undeclared emotion '" +
                               e.emotion + "'");
  }
  if (!ids.insert(e.id).second) {
    throw ParseError(line, "duplicate id '" + e.id + "'");
  }
}

EmotionalEvent event_from_json(const json& record, std::size_t line) {
  static const std::array<std::string_view, 5> kFields = {"id", "text", "emotion",
                                                          "explicit", "split"};
  if (!record.is_object()) throw ParseError(line, "record is not an object");
  for (const auto& [key, _] : record.items()) {
    bool known = false;
    for (auto f : kFields) known = known || key == f;
    if (!known) throw ParseError(line, "unknown field '" + key + "'");
  }
  for (auto f : kFields) {
    if (!record.contains(f)) {
      throw ParseError(line, "missing field '" + std::string(f) + "'");
    }
  }
  auto string_field = [&](const char* name) {
    const auto& v = record.at(name);
    if (!v.is_string()) {
      throw ParseError(line, std::string("field '") + name + "' must be a string");
    }
    return v.get<std::string>();
  };
  EmotionalEvent e;
  e.id = string_field("id");
  e.text = string_field("text");
  e.emotion = string_field("emotion");
  if (!record.at("explicit").is_boolean()) {
    throw ParseError(line, "field 'explicit' must be a boolean");
  }
  e.explicit_flag = record.at("explicit").get<bool>();
  try {
    e.split = parse_split(string_field("split"));
  } catch (const ConfigError& err) {
    throw ParseError(line, err.what());
  }
  return e;
}

}  // namespace

Corpus make_corpus(std::vector<EmotionCategory> categories,
                   std::vector<EmotionalEvent> events, std::string source_tag) {
  check_categories(categories);
  std::unordered_set<std::string> names;
  for (const auto& c : categories) names.insert(c.name);
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < events.size(); ++i) {
    check_event(events[i], i + 1, names, ids);
  }
  return Corpus{std::move(categories), std::move(events), std::move(source_tag)};
}

CategoryDeclaration parse_categories(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ParseError(0, std::string("categories document: ") + err.what());
  }
  if (!doc.is_object() || !doc.contains("categories") ||
      !doc.at("categories").is_array()) {
    throw ParseError(0, "categories document must be an object with a "
                        "'categories' array");
  }
  CategoryDeclaration decl;
  if (doc.contains("source_tag")) {
    if (!doc.at("source_tag").is_string()) {
      throw ParseError(0, "'source_tag' must be a string");
    }
    decl.source_tag = doc.at("source_tag").get<std::string>();
  }
  for (const auto& entry : doc.at("categories")) {
    if (!entry.is_object() || !entry.contains("name") ||
        !entry.at("name").is_string()) {
      throw ParseError(0, "each category needs a string 'name'");
    }
    EmotionCategory c;
    c.name = entry.at("name").get<std::string>();
    c.label_text = c.name;
    if (entry.contains("label_text")) {
      if (!entry.at("label_text").is_string()) {
        throw ParseError(0, "'label_text' of '" + c.name + "' must be a string");
      }
      c.label_text = entry.at("label_text").get<std::string>();
    }
    decl.categories.push_back(std::move(c));
  }
  check_categories(decl.categories);
  return decl;
}

void serialize_categories(const CategoryDeclaration& decl, std::ostream& out) {
  json doc;
  doc["source_tag"] = decl.source_tag;
  doc["categories"] = json::array();
  for (const auto& c : decl.categories) {
    doc["categories"].push_back({{"name", c.name}, {"label_text", c.label_text}});
  }
  out << doc.dump(2) << '\n';
}

Corpus parse_corpus(std::istream& in,
                    const std::optional<CategoryDeclaration>& declared,
                    std::string default_source_tag) {
  Corpus corpus;
  std::unordered_set<std::string> names;
  if (declared) {
    corpus.categories = declared->categories;
    check_categories(corpus.categories);
    for (const auto& c : corpus.categories) names.insert(c.name);
    corpus.source_tag =
        declared->source_tag.empty() ? default_source_tag : declared->source_tag;
  } else {
    corpus.source_tag = std::move(default_source_tag);
  }

  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& err) {
      throw ParseError(line_no, std::string("invalid JSON: ") + err.what());
    }
    EmotionalEvent e = event_from_json(record, line_no);
    if (!declared && !names.contains(e.emotion)) {
      names.insert(e.emotion);
      corpus.categories.push_back({e.emotion, e.emotion});
    }
    check_event(e, line_no, names, ids);
    corpus.events.push_back(std::move(e));
  }
  if (in.bad()) throw IoError("read error while parsing corpus");
  return corpus;
}

void serialize_corpus(const Corpus& corpus, std::ostream& events_out) {
  for (const auto& e : corpus.events) {
    json record;
    record["id"] = e.id;
    record["text"] = e.text;
    record["emotion"] = e.emotion;
    record["explicit"] = e.explicit_flag;
    record["split"] = std::string(to_string(e.split));
    events_out << record.dump() << '\n';
  }
}

Corpus read_corpus(const std::filesystem::path& events_path,
                   const std::optional<std::filesystem::path>& categories_path) {
  std::optional<CategoryDeclaration> decl;
  if (categories_path) {
    std::ifstream cin(*categories_path);
    if (!cin) throw IoError("cannot open categories file " + categories_path->string());
    decl = parse_categories(cin);
  }
  std::ifstream in(events_path);
  if (!in) throw IoError("cannot open corpus file " + events_path.string());
  return parse_corpus(in, decl, events_path.stem().string());
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& events_path,
                  const std::filesystem::path& categories_path) {
  std::ofstream out(events_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + events_path.string());
  serialize_corpus(corpus, out);
  std::ofstream cout(categories_path, std::ios::binary);
  if (!cout) throw IoError("cannot write " + categories_path.string());
  serialize_categories({corpus.source_tag, corpus.categories}, cout);
  if (!out || !cout) throw IoError("write failed for corpus files");
}

const DistributionRow* DistributionSummary::row(std::string_view category) const {
  for (const auto& r : rows) {
    if (r.category == category) return &r;
  }
  return nullptr;
}

DistributionSummary distribution_summary(const Corpus& corpus) {
  DistributionSummary summary;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& c : corpus.categories) {
    index.emplace(c.name, summary.rows.size());
    summary.rows.push_back(DistributionRow{c.name, {}, 0, 0});
  }
  summary.totals.category = "total";
  for (const auto& e : corpus.events) {
    auto& row = summary.rows[index.at(e.emotion)];
    const auto s = static_cast<std::size_t>(e.split);
    ++row.per_split[s];
    ++row.total;
    ++summary.totals.per_split[s];
    ++summary.totals.total;
    if (e.explicit_flag) {
      ++row.explicit_count;
      ++summary.totals.explicit_count;
    }
  }
  return summary;
}

std::string render_distribution(const DistributionSummary& summary) {
  std::ostringstream os;
  auto emit = [&os](const DistributionRow& r) {
    os << std::left << std::setw(12) << r.category << std::right;
    for (auto n : r.per_split) os << std::setw(8) << n;
    os << std::setw(8) << r.total << std::setw(10) << r.explicit_count << '\n';
  };
  os << std::left << std::setw(12) << "emotion" << std::right << std::setw(8)
     << "train" << std::setw(8) << "valid" << std::setw(8) << "test"
     << std::setw(8) << "total" << std::setw(10) << "explicit" << '\n';
  for (const auto& r : summary.rows) emit(r);
  emit(summary.totals);
  return os.str();
}

}  // namespace emoprobe
