#include <algorithm>
#include <random>

#include "doctest.h"
#include "emoprobe/errors.hpp"
#include "emoprobe/evaluate.hpp"
#include "emoprobe/report.hpp"
#include "emoprobe/synthetic.hpp"
#include "random_data.hpp"

using namespace emoprobe;

namespace {

EvaluationReport sample_report(std::uint64_t seed, const std::string& model_tag) {
  SyntheticConfig cfg;
  cfg.events_per_category = 40;
  auto [corpus, set] = generate_synthetic(cfg, 1);
  set.model_tag = model_tag;
  const auto params = init_parameters(cfg.dim, 6, 0.1, seed);
  EvaluationOptions opts;
  opts.checkpoint_ref = "sha256:test";
  opts.timestamp = "2026-01-01T00:00:00Z";
  return evaluate_all(params, corpus, set, {3, 10}, opts);
}

}  // namespace

TEST_CASE("percent cells") {
  CHECK(format_percent(72, 533) == "13.51");
  CHECK(format_cell(MetricValue{MetricKind::kDiversity, 50, "joy", 72, 533, true}) ==
        "13.51 (72)");
  CHECK(format_percent(0.135) == "13.50");
  CHECK(format_percent(1, 8) == "12.50");
  CHECK(format_percent(1, 3) == "33.33");
  CHECK(format_percent(2, 3) == "66.67");
  CHECK(format_percent(1, 1) == "100.00");
  CHECK(format_percent(0, 7) == "0.00");
  CHECK(format_percent(1, 80000) == "0.00");
  CHECK(format_percent(1, 40000) == "0.00");
  CHECK(format_percent(1, 20000) == "0.01");  // exactly half a hundredth rounds up
  CHECK(format_cell(MetricValue{MetricKind::kDiversity, 3, "joy", 0, 0, false}) == "—*");
}

TEST_CASE("rendering is deterministic and complete") {
  const auto report = sample_report(1, "m1");
  for (auto format : {ReportFormat::kDelimited, ReportFormat::kStructured,
                      ReportFormat::kPlainText}) {
    CHECK(render(report, format) == render(sample_report(1, "m1"), format));
  }
  const auto tsv = render(report, ReportFormat::kDelimited);
  const auto lines = std::count(tsv.begin(), tsv.end(), '\n');
  CHECK(lines == 1 + 3 * 2 * 4 + 2 * 4 + 2);
  CHECK(tsv.find("(macro)") != std::string::npos);
  CHECK(tsv.find("(micro)") != std::string::npos);

  const auto text = render(report, ReportFormat::kPlainText);
  CHECK(text.find("model: m1") != std::string::npos);
  CHECK(text.find("P@K") != std::string::npos);
  CHECK(text.find("D@K") != std::string::npos);

  CHECK(parse_report_format("tsv") == ReportFormat::kDelimited);
  CHECK(file_extension(ReportFormat::kStructured) == ".json");
  CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
}

TEST_CASE("structured reports parse back to the same report") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto report = sample_report(seed, "m");
    CHECK(parse_structured_report(render(report, ReportFormat::kStructured)) == report);
  }
  CHECK_THROWS_AS(parse_structured_report("{"), FormatError);
  CHECK_THROWS_AS(parse_structured_report(R"({"schema_version": 99})"), FormatError);
}

TEST_CASE("undefined cells carry a footnote") {
  std::mt19937_64 rng(1);
  RankedList none;
  none.query = "angry";
  none.entries = {{"e1", 0.5, "joy", false, "x"}};
  RankedList joy = none;
  joy.query = "joy";
  auto report = evaluate_rankings({joy, none}, {3});
  report.model_tag = "m";
  report.source_tag = "s";
  report.checkpoint_ref = "c";
  report.timestamp = "t";
  report.tool_version = "v";
  CHECK_NOTHROW(validate(report));
  const auto text = render(report, ReportFormat::kPlainText);
  CHECK(text.find("—*") != std::string::npos);
  CHECK(text.find("* undefined") != std::string::npos);
  CHECK(report.macro_at(3, MetricKind::kPrecision).value == 1.0);
}

TEST_CASE("validate rejects missing provenance and duplicate cells") {
  auto report = sample_report(1, "m");
  CHECK_NOTHROW(validate(report));
  auto bad = report;
  bad.model_tag.clear();
  CHECK_THROWS_AS(validate(bad), Error);
  bad = report;
  bad.per_query.push_back(bad.per_query.front());
  CHECK_THROWS_AS(validate(bad), Error);
  bad = report;
  bad.per_query.pop_back();
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("merging reports") {
  const std::vector<EvaluationReport> reports = {sample_report(1, "zeta"),
                                                 sample_report(2, "alpha")};
  const auto table = merge(reports);
  CHECK(table.rows.size() == 2 * 3 * 2);
  CHECK(table.rows.front().model_tag == "alpha");
  CHECK(table.rows.front().emotion == "joy");
  CHECK(table.rows.front().k == 3);
  CHECK(table.rows[1].k == 10);
  CHECK(table.rows.back().model_tag == "zeta");
  const auto tsv = render(table, ReportFormat::kDelimited);
  CHECK(tsv.find("alpha") != std::string::npos);
  CHECK(render(table, ReportFormat::kPlainText).find("zeta") != std::string::npos);
  CHECK_THROWS_AS(render(table, ReportFormat::kStructured), ConfigError);

  auto other = reports;
  other[1].source_tag = "other-corpus";
  try {
    merge(other);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
  other = reports;
  other[1].model_tag = "zeta";
  CHECK_THROWS_AS(merge(other), Error);
  other = reports;
  other[1].ks = {3};
  CHECK_THROWS_AS(merge(other), Error);
  CHECK_THROWS_AS(merge(std::span<const EvaluationReport>{}), Error);
}
