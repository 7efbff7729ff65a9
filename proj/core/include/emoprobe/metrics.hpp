#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "emoprobe/retrieval.hpp"

namespace emoprobe {

// De-duplication key: NFC, lowercased, trimmed, inner whitespace runs
// collapsed to a single ASCII space. Invalid UTF-8 sequences become U+FFFD.
std::string normalize_text(std::string_view text);

enum class MetricKind { kPrecision, kDiversity, kExplicitRate, kImplicitRate };

inline constexpr MetricKind kAllMetricKinds[] = {
    MetricKind::kPrecision, MetricKind::kDiversity, MetricKind::kExplicitRate,
    MetricKind::kImplicitRate};

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view text);

enum class FlagMode { kExplicit, kImplicit };

// A ratio kept as exact counts:
//   precision      n_cr^K / n_ar            (n_ar = min(K, pool size))
//   diversity      n_ur^K / n_cr^K
//   explicit rate  explicit correct / n_cr^K   (implicit analogously)
// `defined` is false when the ratio is not measurable; value is then 0.
struct MetricValue {
  MetricKind kind = MetricKind::kPrecision;
  std::size_t k = 0;
  std::string query;
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  bool defined = false;

  double value() const {
    return defined ? static_cast<double>(numerator) / static_cast<double>(denominator) : 0.0;
  }
  bool operator==(const MetricValue&) const = default;
};

// Takes the full ranking. Undefined when the pool is empty or holds no event
// of the query emotion (such a query has nothing to retrieve).
MetricValue precision_at_k(const RankedList& list, std::size_t k);
MetricValue diversity_at_k(const RankedList& list, std::size_t k);
MetricValue explicit_rate_at_k(const RankedList& list, std::size_t k, FlagMode mode);

}  // namespace emoprobe
