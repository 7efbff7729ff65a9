#include "emoprobe/metrics.hpp"

#include <algorithm>
#include <unordered_set>

#include "emoprobe/errors.hpp"

namespace emoprobe {

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kPrecision:
      return "precision";
    case MetricKind::kDiversity:
      return "diversity";
    case MetricKind::kExplicitRate:
      return "explicit_rate";
    case MetricKind::kImplicitRate:
      return "implicit_rate";
  }
  return "?";
}

MetricKind parse_metric_kind(std::string_view text) {
  for (auto kind : kAllMetricKinds) {
    if (to_string(kind) == text) return kind;
  }
  throw ConfigError("metric", "unknown metric kind '" + std::string(text) + "'");
}

namespace {

void check_k(std::size_t k) {
  if (k == 0) throw ConfigError("K", "cutoff must be >= 1");
}

std::size_t cutoff(const RankedList& list, std::size_t k) {
  return std::min(k, list.entries.size());
}

bool correct(const RankedList& list, const RankedEntry& e) {
  return e.gold_emotion == list.query;
}

bool pool_has_relevant(const RankedList& list) {
  return std::any_of(list.entries.begin(), list.entries.end(),
                     [&](const RankedEntry& e) { return correct(list, e); });
}

std::size_t correct_in_top(const RankedList& list, std::size_t k) {
  const auto n = cutoff(list, k);
  return static_cast<std::size_t>(std::count_if(
      list.entries.begin(), list.entries.begin() + static_cast<std::ptrdiff_t>(n),
      [&](const RankedEntry& e) { return correct(list, e); }));
}

}  // namespace

MetricValue precision_at_k(const RankedList& list, std::size_t k) {
  check_k(k);
  MetricValue m{MetricKind::kPrecision, k, list.query, 0, cutoff(list, k), false};
  m.numerator = correct_in_top(list, k);
  m.defined = m.denominator > 0 && pool_has_relevant(list);
  return m;
}

MetricValue diversity_at_k(const RankedList& list, std::size_t k) {
  check_k(k);
  MetricValue m{MetricKind::kDiversity, k, list.query, 0, 0, false};
  std::unordered_set<std::string> unique;
  const auto n = cutoff(list, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = list.entries[i];
    if (!correct(list, e)) continue;
    ++m.denominator;
    // Re-normalising is idempotent and covers lists built outside make_pool.
    unique.insert(normalize_text(e.normalized_text));
  }
  m.numerator = unique.size();
  m.defined = m.denominator > 0;
  return m;
}

MetricValue explicit_rate_at_k(const RankedList& list, std::size_t k, FlagMode mode) {
  check_k(k);
  const auto kind =
      mode == FlagMode::kExplicit ? MetricKind::kExplicitRate : MetricKind::kImplicitRate;
  MetricValue m{kind, k, list.query, 0, 0, false};
  const bool want = mode == FlagMode::kExplicit;
  const auto n = cutoff(list, k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = list.entries[i];
    if (!correct(list, e)) continue;
    ++m.denominator;
    if (e.explicit_flag == want) ++m.numerator;
  }
  m.defined = m.denominator > 0;
  return m;
}

}  // namespace emoprobe
