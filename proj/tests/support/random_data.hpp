#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "emoprobe/probe.hpp"
#include "emoprobe/retrieval.hpp"

namespace testdata {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

inline emoprobe::ProbeParameters random_params(std::mt19937_64& rng, Eigen::Index d,
                                               Eigen::Index dp, double tau) {
  emoprobe::ProbeParameters p;
  p.label_projection = gaussian(rng, dp, d, 1.0 / std::sqrt(static_cast<double>(d)));
  p.event_projection = gaussian(rng, dp, d, 1.0 / std::sqrt(static_cast<double>(d)));
  p.temperature = tau;
  return p;
}

struct RandomBatch {
  Eigen::MatrixXd anchors;
  std::vector<std::size_t> anchor_category;
  Eigen::MatrixXd candidates;
  std::vector<std::size_t> candidate_category;
};

// n_categories anchors (one per category) and n_candidates events with
// random categories; every category gets at least one candidate when
// n_candidates >= n_categories.
inline RandomBatch random_batch(std::mt19937_64& rng, std::size_t n_categories,
                                std::size_t n_candidates, Eigen::Index d) {
  RandomBatch b;
  b.anchors = gaussian(rng, static_cast<Eigen::Index>(n_categories), d);
  b.candidates = gaussian(rng, static_cast<Eigen::Index>(n_candidates), d);
  std::uniform_int_distribution<std::size_t> pick(0, n_categories - 1);
  for (std::size_t c = 0; c < n_categories; ++c) b.anchor_category.push_back(c);
  for (std::size_t j = 0; j < n_candidates; ++j) {
    b.candidate_category.push_back(j < n_categories ? j : pick(rng));
  }
  return b;
}

// Random ranked list over a small vocabulary of texts that collide after
// case/whitespace normalisation; some lists contain no relevant entry.
inline emoprobe::RankedList random_ranked_list(std::mt19937_64& rng) {
  static const std::vector<std::string> kTexts = {
      "feel lonely", "Feel  lonely", " FEEL LONELY ", "lost my job", "Lost my  job",
      "successful career", "glad someone helped", "a stranger smiled", "missed the bus"};
  static const std::vector<std::string> kEmotions = {"joy", "sad", "angry"};
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> text(0, kTexts.size() - 1);
  std::uniform_int_distribution<std::size_t> emo(0, kEmotions.size() - 1);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution rare(0.1);

  emoprobe::RankedList list;
  list.query = kEmotions[emo(rng)];
  list.pool_tag = "test";
  const auto n = len(rng);
  const bool no_relevant = rare(rng);
  double score = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::string gold = kEmotions[emo(rng)];
    if (no_relevant && gold == list.query) gold = list.query == "joy" ? "sad" : "joy";
    score -= 0.01;
    list.entries.push_back({"e" + std::to_string(1000 + i), score, gold, coin(rng),
                            kTexts[text(rng)]});
  }
  return list;
}

}  // namespace testdata
