#include "emoprobe/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "emoprobe/errors.hpp"
#include "emoprobe/metrics.hpp"
#include "json.hpp"

namespace emoprobe {

CandidatePool make_pool(const Corpus& corpus, const EmbeddingSet& embeddings, Split split) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < embeddings.events.ids.size(); ++i) {
    row_of.emplace(embeddings.events.ids[i], i);
  }
  CandidatePool pool;
  pool.tag = std::string(to_string(split));
  const auto members = corpus.events_in(split);
  const auto dim = embeddings.events.matrix.dim;
  pool.embeddings.resize(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < members.size(); ++r) {
    const auto& e = *members[r];
    const auto it = row_of.find(e.id);
    if (it == row_of.end()) {
      throw AlignmentError("missing embedding for event '" + e.id + "'");
    }
    const auto values = embeddings.events.matrix.row(it->second);
    for (std::size_t k = 0; k < dim; ++k) {
      pool.embeddings(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = values[k];
    }
    pool.items.push_back({e.id, e.emotion, e.explicit_flag, normalize_text(e.text)});
  }
  return pool;
}

RankedList rank_events(const ProbeParameters& params, const std::string& query,
                       const Eigen::Ref<const Eigen::VectorXd>& label_embedding,
                       const CandidatePool& pool) {
  if (pool.items.empty()) throw AlignmentError("candidate pool is empty");
  if (static_cast<std::size_t>(pool.embeddings.rows()) != pool.items.size()) {
    throw AlignmentError("candidate pool rows and items differ in length");
  }
  const Eigen::MatrixXd label = label_embedding.transpose();
  const Eigen::MatrixXd scores = similarity_matrix(params, label, pool.embeddings);

  std::vector<std::size_t> order(pool.items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = scores(0, static_cast<Eigen::Index>(a));
    const double sb = scores(0, static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return pool.items[a].event_id < pool.items[b].event_id;
  });

  RankedList list;
  list.query = query;
  list.pool_tag = pool.tag;
  list.entries.reserve(order.size());
  for (auto idx : order) {
    const auto& item = pool.items[idx];
    list.entries.push_back({item.event_id, scores(0, static_cast<Eigen::Index>(idx)),
                            item.gold_emotion, item.explicit_flag, item.normalized_text});
  }
  return list;
}

RankedList rank_events(const ProbeParameters& params, const EmotionCategory& query,
                       const EmbeddingSet& embeddings, const CandidatePool& pool) {
  const auto row = embeddings.labels.find(query.name);
  if (row == LabeledMatrix::npos) {
    throw AlignmentError("missing label embedding for '" + query.name + "'");
  }
  const auto values = embeddings.labels.matrix.row(row);
  Eigen::VectorXd label(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) label(static_cast<Eigen::Index>(k)) = values[k];
  return rank_events(params, query.name, label, pool);
}

std::vector<RankedList> rank_all(const ProbeParameters& params, const Corpus& corpus,
                                 const EmbeddingSet& embeddings, const CandidatePool& pool) {
  std::vector<RankedList> out;
  out.reserve(corpus.categories.size());
  for (const auto& c : corpus.categories) out.push_back(rank_events(params, c, embeddings, pool));
  return out;
}

RankedList top_k(const RankedList& list, std::size_t k) {
  if (k == 0) throw ConfigError("K", "cutoff must be >= 1");
  RankedList out;
  out.query = list.query;
  out.pool_tag = list.pool_tag;
  const auto n = std::min(k, list.entries.size());
  out.entries.assign(list.entries.begin(), list.entries.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void write_ranked_list(const RankedList& list, std::ostream& out) {
  std::size_t rank = 0;
  for (const auto& e : list.entries) {
    char score[64];
    std::snprintf(score, sizeof score, "%.9f", e.score);
    // Score is emitted verbatim so the fixed 9-decimal rendering survives.
    out << "{\"query\":" << nlohmann::json(list.query).dump() << ",\"rank\":" << ++rank
        << ",\"id\":" << nlohmann::json(e.event_id).dump() << ",\"score\":" << score
        << ",\"gold\":" << nlohmann::json(e.gold_emotion).dump()
        << ",\"explicit\":" << (e.explicit_flag ? "true" : "false") << "}\n";
  }
}

}  // namespace emoprobe
