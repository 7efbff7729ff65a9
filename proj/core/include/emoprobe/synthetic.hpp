#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>

#include "emoprobe/corpus.hpp"
#include "emoprobe/embedding_store.hpp"

namespace emoprobe {

// Gaussian-cluster corpus generator used as oracle data.
//
// Category c gets mean mu_c = offset + separation / sqrt(2) * q_c where the
// q_c are orthonormal random directions (unit-norm when n_categories > dim)
// and `offset` is a shared random vector of norm center_norm. With orthonormal
// directions every pair of means is exactly `cluster_separation` apart, and
// with separation 0 all means (and label embeddings) coincide. Event
// embeddings are mu_c plus isotropic noise of scale noise_scale; the label
// embedding of c is mu_c itself.
struct SyntheticConfig {
  std::size_t n_categories = 3;
  std::size_t events_per_category = 100;
  std::size_t dim = 16;
  double cluster_separation = 10.0;
  double duplicate_fraction = 0.0;
  double explicit_fraction = 0.5;
  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};  // train, valid, test
  double center_norm = 1.0;
  double noise_scale = 1.0;
};

// Throws ConfigError naming the first invalid field.
void validate(const SyntheticConfig& config);

// Per category: floor(duplicate_fraction * n) events are exact text (and
// embedding) copies of earlier events of the same category; split and
// explicit counts are round(ratio * n), with test taking the remainder.
// Deterministic in (config, seed) on every platform.
std::pair<Corpus, EmbeddingSet> generate_synthetic(const SyntheticConfig& config,
                                                   std::uint64_t seed);

// Name of the i-th synthetic category ("joy", "sad", "angry", ...).
std::string synthetic_category_name(std::size_t index);

}  // namespace emoprobe
