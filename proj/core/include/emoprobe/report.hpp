#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emoprobe/metrics.hpp"

namespace emoprobe {

inline constexpr int kReportSchemaVersion = 1;

// Mean over the queries whose metric is defined; `skipped` lists the rest.
struct MacroValue {
  MetricKind kind = MetricKind::kPrecision;
  std::size_t k = 0;
  double value = 0.0;
  std::size_t defined_count = 0;
  std::vector<std::string> skipped;
  bool defined = false;

  bool operator==(const MacroValue&) const = default;
};

// Pooled precision: sum of n_cr^K over sum of n_ar across defined queries.
struct MicroPrecision {
  std::size_t k = 0;
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  bool defined = false;

  double value() const {
    return defined ? static_cast<double>(numerator) / static_cast<double>(denominator) : 0.0;
  }
  bool operator==(const MicroPrecision&) const = default;
};

struct EvaluationReport {
  int schema_version = kReportSchemaVersion;
  std::string model_tag;
  std::string source_tag;
  std::string checkpoint_ref;
  std::string pool_split = "test";
  std::string timestamp;
  std::string tool_version;
  std::vector<std::size_t> ks;
  std::vector<std::string> emotions;
  // Emotion-major, then K, then metric kind in kAllMetricKinds order.
  std::vector<MetricValue> per_query;
  // K-major, then metric kind.
  std::vector<MacroValue> macro;
  std::vector<MicroPrecision> micro_precision;  // one per K

  const MetricValue& at(std::string_view emotion, std::size_t k, MetricKind kind) const;
  const MacroValue& macro_at(std::size_t k, MetricKind kind) const;

  bool operator==(const EvaluationReport&) const = default;
};

// Fills macro and micro rows from per_query.
void compute_aggregates(EvaluationReport& report);

// Throws Error when a requested (emotion, K, kind) cell is missing or
// duplicated, or a provenance field is empty.
void validate(const EvaluationReport& report);

enum class ReportFormat { kDelimited, kStructured, kPlainText };

ReportFormat parse_report_format(std::string_view tag);  // "tsv", "json", "text"
std::string_view file_extension(ReportFormat format);

// Percent with two decimals, rounded half-up from exact counts:
// (72, 533) -> "13.51".
std::string format_percent(std::size_t numerator, std::size_t denominator);
std::string format_percent(double fraction);
// "13.51 (72)"; undefined cells render as "—*".
std::string format_cell(const MetricValue& m);

inline constexpr std::string_view kUndefinedCell = "—*";

std::string render(const EvaluationReport& report, ReportFormat format);

// Inverse of render(..., kStructured).
EvaluationReport parse_structured_report(std::string_view document);

struct ComparisonRow {
  std::string model_tag;
  std::string emotion;
  std::size_t k = 0;
  MetricValue precision;
  MetricValue diversity;
  MetricValue explicit_rate;
  MetricValue implicit_rate;
};

struct ComparisonTable {
  std::string source_tag;
  std::vector<std::size_t> ks;
  std::vector<std::string> emotions;
  std::vector<ComparisonRow> rows;  // by model tag, then emotion, then K
};

// Throws Error naming the offending report when corpora, Ks or emotion sets
// differ, or a model tag appears twice.
ComparisonTable merge(std::span<const EvaluationReport> reports);

// kDelimited or kPlainText.
std::string render(const ComparisonTable& table, ReportFormat format);

}  // namespace emoprobe
