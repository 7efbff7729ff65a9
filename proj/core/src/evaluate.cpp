#include "emoprobe/evaluate.hpp"

#include "emoprobe/errors.hpp"

namespace emoprobe {

EvaluationReport evaluate_rankings(const std::vector<RankedList>& rankings,
                                   const std::vector<std::size_t>& ks) {
  if (ks.empty()) throw ConfigError("K", "at least one cutoff is required");
  for (auto k : ks) {
    if (k == 0) throw ConfigError("K", "cutoff must be >= 1");
  }
  EvaluationReport report;
  report.ks = ks;
  for (const auto& list : rankings) {
    report.emotions.push_back(list.query);
    for (auto k : ks) {
      report.per_query.push_back(precision_at_k(list, k));
      report.per_query.push_back(diversity_at_k(list, k));
      report.per_query.push_back(explicit_rate_at_k(list, k, FlagMode::kExplicit));
      report.per_query.push_back(explicit_rate_at_k(list, k, FlagMode::kImplicit));
    }
  }
  compute_aggregates(report);
  return report;
}

EvaluationReport evaluate_all(const ProbeParameters& params, const Corpus& corpus,
                              const EmbeddingSet& embeddings,
                              const std::vector<std::size_t>& ks,
                              const EvaluationOptions& options) {
  require_alignment(embeddings, corpus);
  const CandidatePool pool = make_pool(corpus, embeddings, options.pool);
  std::vector<RankedList> rankings;
  if (pool.items.empty()) {
    // Nothing to retrieve: every metric is reported as undefined.
    for (const auto& c : corpus.categories) {
      rankings.push_back(RankedList{c.name, {}, pool.tag});
    }
  } else {
    rankings = rank_all(params, corpus, embeddings, pool);
  }
  EvaluationReport report = evaluate_rankings(rankings, ks);
  report.model_tag = embeddings.model_tag;
  report.source_tag = corpus.source_tag;
  report.checkpoint_ref = options.checkpoint_ref;
  report.pool_split = pool.tag;
  report.timestamp = options.timestamp;
  report.tool_version = options.tool_version;
  return report;
}

}  // namespace emoprobe
