#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "emoprobe/corpus.hpp"
#include "emoprobe/embedding_store.hpp"
#include "emoprobe/probe.hpp"

namespace emoprobe {

struct RankedEntry {
  std::string event_id;
  double score = 0.0;
  std::string gold_emotion;
  bool explicit_flag = false;
  std::string normalized_text;

  bool operator==(const RankedEntry&) const = default;
};

// Scores are non-increasing; equal scores are ordered by ascending event id.
struct RankedList {
  std::string query;
  std::vector<RankedEntry> entries;
  std::string pool_tag;

  bool operator==(const RankedList&) const = default;
};

struct PoolItem {
  std::string event_id;
  std::string gold_emotion;
  bool explicit_flag = false;
  std::string normalized_text;
};

// Retrieval candidates with their embeddings (row i <-> items[i]).
struct CandidatePool {
  std::vector<PoolItem> items;
  Eigen::MatrixXd embeddings;
  std::string tag;
};

// Events of `split` in corpus order. Throws AlignmentError when an event has
// no embedding.
CandidatePool make_pool(const Corpus& corpus, const EmbeddingSet& embeddings, Split split);

// Full ranking of the pool for one query label embedding.
RankedList rank_events(const ProbeParameters& params, const std::string& query,
                       const Eigen::Ref<const Eigen::VectorXd>& label_embedding,
                       const CandidatePool& pool);

// Looks up the query's label row in `embeddings`; AlignmentError if absent.
RankedList rank_events(const ProbeParameters& params, const EmotionCategory& query,
                       const EmbeddingSet& embeddings, const CandidatePool& pool);

// One ranking per corpus category, in declaration order.
std::vector<RankedList> rank_all(const ProbeParameters& params, const Corpus& corpus,
                                 const EmbeddingSet& embeddings, const CandidatePool& pool);

// First min(k, size) entries. Throws ConfigError for k == 0.
RankedList top_k(const RankedList& list, std::size_t k);

// One JSON object per line: query, rank (1-based), id, score (9 decimals),
// gold, explicit.
void write_ranked_list(const RankedList& list, std::ostream& out);

}  // namespace emoprobe
