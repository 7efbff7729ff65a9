#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "emoprobe/corpus.hpp"
#include "emoprobe/embedding_store.hpp"
#include "emoprobe/errors.hpp"

using namespace emoprobe;

namespace {

std::string encode(const EmbeddingMatrix& m, const std::vector<std::string>& ids,
                   std::string* manifest = nullptr) {
  std::ostringstream out, man;
  write_matrix(m, ids, out, man);
  if (manifest != nullptr) *manifest = man.str();
  return out.str();
}

LabeledMatrix decode(const std::string& bytes, const std::string& manifest) {
  std::istringstream in(bytes), man(manifest);
  return read_matrix(in, man);
}

// Message of the rejection, or empty when the input was accepted.
std::string format_error(const std::string& bytes, const std::string& manifest) {
  try {
    decode(bytes, manifest);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::vector<std::string> ids_for(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("e" + std::to_string(i));
  return ids;
}

}  // namespace

TEST_CASE("header and payload sizes") {
  CHECK(encode(EmbeddingMatrix(0, 8), {}).size() == 24);
  EmbeddingMatrix m(2, 3);
  m.values = {1, 2, 3, 4, 5, 6};
  const auto bytes = encode(m, {"a", "b"});
  CHECK(bytes.size() == 48);
  CHECK(bytes.substr(0, 4) == "EMBD");
  float first = 0.0f;
  std::memcpy(&first, bytes.data() + 24, 4);
  CHECK(first == 1.0f);
}

TEST_CASE("empty matrix round-trips with its dimension") {
  std::string manifest;
  const auto bytes = encode(EmbeddingMatrix(0, 8), {}, &manifest);
  const auto back = decode(bytes, manifest);
  CHECK(back.matrix.count == 0);
  CHECK(back.matrix.dim == 8);
}

TEST_CASE("malformed files are rejected with a description") {
  EmbeddingMatrix m(2, 3);
  m.values = {1, 2, 3, 4, 5, 6};
  std::string manifest;
  const auto good = encode(m, {"a", "b"}, &manifest);

  SUBCASE("unknown version") {
    auto bytes = good;
    const std::uint32_t v = 99;
    std::memcpy(bytes.data() + 4, &v, 4);
    const auto msg = format_error(bytes, manifest);
    CHECK(msg.find("version") != std::string::npos);
    CHECK(msg.find("99") != std::string::npos);
  }
  SUBCASE("bad magic") {
    auto bytes = good;
    bytes[0] = 'X';
    CHECK(format_error(bytes, manifest).find("magic") != std::string::npos);
  }
  SUBCASE("truncated payload states expected and actual sizes") {
    const auto msg = format_error(good.substr(0, 40), manifest);
    CHECK(msg.find("24") != std::string::npos);
    CHECK(msg.find("16") != std::string::npos);
  }
  SUBCASE("truncated header") {
    CHECK_FALSE(format_error(good.substr(0, 10), manifest).empty());
  }
  SUBCASE("NaN value") {
    auto bytes = good;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + 24 + 4 * 4, &nan, 4);
    const auto msg = format_error(bytes, manifest);
    CHECK(msg.find("row 1") != std::string::npos);
  }
  SUBCASE("manifest length mismatch") {
    CHECK_FALSE(format_error(good, "a\n").empty());
  }
  SUBCASE("duplicate ids") {
    CHECK_FALSE(format_error(good, "a\na\n").empty());
  }
  SUBCASE("unknown dtype") {
    auto bytes = good;
    bytes[20] = 1;
    CHECK(format_error(bytes, manifest).find("dtype") != std::string::npos);
  }
}

TEST_CASE("writer refuses inconsistent input") {
  EmbeddingMatrix m(2, 2);
  std::ostringstream a, b;
  CHECK_THROWS(write_matrix(m, ids_for(1), a, b));
  const std::vector<std::string> bad_ids = {"a\nb", "c"};
  CHECK_THROWS(write_matrix(m, bad_ids, a, b));
  m.values[0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS(write_matrix(m, ids_for(2), a, b));
}

TEST_CASE("random matrices round-trip bit-exactly") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> rows(0, 40), cols(1, 33);
  std::normal_distribution<float> value(0.0f, 3.0f);
  for (int trial = 0; trial < 100; ++trial) {
    EmbeddingMatrix m(rows(rng), cols(rng));
    for (auto& v : m.values) v = value(rng);
    const auto ids = ids_for(m.count);
    std::string manifest;
    const auto bytes = encode(m, ids, &manifest);
    CHECK(bytes.size() == 24 + 4 * m.values.size());
    const auto back = decode(bytes, manifest);
    CHECK(std::memcmp(back.matrix.values.data(), m.values.data(), 4 * m.values.size()) == 0);
    CHECK(back.matrix.count == m.count);
    CHECK(back.matrix.dim == m.dim);
    CHECK(back.ids == ids);
  }
}

TEST_CASE("embedding set directory round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "emoprobe_test_embedding_set";
  std::filesystem::remove_all(dir);
  EmbeddingSet set;
  set.events.matrix = EmbeddingMatrix(2, 3);
  set.events.matrix.values = {1, 2, 3, 4, 5, 6};
  set.events.ids = {"e1", "e2"};
  set.labels.matrix = EmbeddingMatrix(1, 3);
  set.labels.ids = {"joy"};
  set.model_tag = "bert-base";
  save_embedding_set(set, dir);
  const auto back = load_embedding_set(dir);
  CHECK(back.events == set.events);
  CHECK(back.labels == set.labels);
  CHECK(back.model_tag == "bert-base");

  std::filesystem::remove(dir / "embedding_set.json");
  CHECK(load_embedding_set(dir).model_tag == dir.filename().string());
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_embedding_set(dir), IoError);
}

TEST_CASE("alignment validation") {
  std::vector<EmotionalEvent> events;
  for (int i = 1; i <= 10; ++i) {
    events.push_back({"e" + std::to_string(i), "t" + std::to_string(i), "joy", false,
                      Split::kTrain});
  }
  const auto corpus = make_corpus({{"joy", "joy"}}, events, "t");

  EmbeddingSet set;
  set.events.matrix = EmbeddingMatrix(10, 4);
  for (int i = 1; i <= 10; ++i) set.events.ids.push_back("e" + std::to_string(i));
  set.labels.matrix = EmbeddingMatrix(1, 4);
  set.labels.ids = {"joy"};
  CHECK(validate_alignment(set, corpus).ok());

  SUBCASE("missing event") {
    auto s = set;
    s.events.matrix = EmbeddingMatrix(9, 4);
    s.events.ids.erase(s.events.ids.begin() + 8);  // e9
    const auto r = validate_alignment(s, corpus);
    CHECK_FALSE(r.ok());
    CHECK(r.missing_events == std::vector<std::string>{"e9"});
    try {
      require_alignment(s, corpus);
      FAIL("expected AlignmentError");
    } catch (const AlignmentError& e) {
      CHECK(std::string(e.what()).find("e9") != std::string::npos);
    }
  }
  SUBCASE("dimension mismatch names both sizes") {
    auto s = set;
    s.events.matrix = EmbeddingMatrix(10, 768);
    s.labels.matrix = EmbeddingMatrix(1, 512);
    const auto r = validate_alignment(s, corpus);
    CHECK_FALSE(r.dims_match());
    const auto text = r.describe();
    CHECK(text.find("768") != std::string::npos);
    CHECK(text.find("512") != std::string::npos);
  }
  SUBCASE("orphan event and missing label") {
    auto s = set;
    s.events.matrix = EmbeddingMatrix(11, 4);
    s.events.ids.push_back("extra");
    s.labels.ids = {"sad"};
    const auto r = validate_alignment(s, corpus);
    CHECK(r.orphan_events == std::vector<std::string>{"extra"});
    CHECK(r.missing_labels == std::vector<std::string>{"joy"});
  }
}
