#pragma once

#include <string>
#include <vector>

#include "emoprobe/corpus.hpp"
#include "emoprobe/embedding_store.hpp"
#include "emoprobe/probe.hpp"
#include "emoprobe/report.hpp"
#include "emoprobe/retrieval.hpp"

namespace emoprobe {

inline const std::vector<std::size_t> kDefaultCutoffs = {3, 10, 50};

struct EvaluationOptions {
  Split pool = Split::kTest;
  std::string checkpoint_ref = "in-memory";
  std::string timestamp = "unspecified";
  std::string tool_version = EMOPROBE_VERSION_STRING;
};

// Ranks the pool for every corpus category and computes precision,
// diversity, explicit and implicit rates at each K, plus macro and micro
// aggregates.
EvaluationReport evaluate_all(const ProbeParameters& params, const Corpus& corpus,
                              const EmbeddingSet& embeddings,
                              const std::vector<std::size_t>& ks,
                              const EvaluationOptions& options = {});

// Same, over precomputed rankings (one per emotion).
EvaluationReport evaluate_rankings(const std::vector<RankedList>& rankings,
                                   const std::vector<std::size_t>& ks);

}  // namespace emoprobe
