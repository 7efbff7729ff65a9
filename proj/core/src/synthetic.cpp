#include "emoprobe/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "emoprobe/errors.hpp"
#include "emoprobe/rng.hpp"

namespace emoprobe {

namespace {

std::size_t rounded_count(double ratio, std::size_t n) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
}

std::vector<double> random_unit(CounterRng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

// Orthonormal directions when count <= dim, otherwise independent unit vectors.
std::vector<std::vector<double>> directions(CounterRng& rng, std::size_t count,
                                            std::size_t dim) {
  std::vector<std::vector<double>> q;
  while (q.size() < count) {
    auto v = random_unit(rng, dim);
    if (count <= dim) {
      for (const auto& u : q) {
        const double dot = std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
        for (std::size_t k = 0; k < dim; ++k) v[k] -= dot * u[k];
      }
      const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
      if (norm < 1e-6) continue;
      for (auto& x : v) x /= norm;
    }
    q.push_back(std::move(v));
  }
  return q;
}

}  // namespace

std::string synthetic_category_name(std::size_t index) {
  static const char* kNames[] = {"joy", "sad", "angry", "fear", "surprise", "disgust"};
  if (index < std::size(kNames)) return kNames[index];
  return "emotion" + std::to_string(index);
}

void validate(const SyntheticConfig& config) {
  if (config.n_categories < 2) throw ConfigError("n_categories", "must be >= 2");
  if (config.events_per_category < 1) {
    throw ConfigError("events_per_category", "must be >= 1");
  }
  if (config.dim < 2) throw ConfigError("dim", "must be >= 2");
  if (!std::isfinite(config.cluster_separation) || config.cluster_separation < 0.0) {
    throw ConfigError("cluster_separation", "must be finite and >= 0");
  }
  if (!(config.duplicate_fraction >= 0.0 && config.duplicate_fraction < 1.0)) {
    throw ConfigError("duplicate_fraction", "must lie in [0, 1)");
  }
  if (!(config.explicit_fraction >= 0.0 && config.explicit_fraction <= 1.0)) {
    throw ConfigError("explicit_fraction", "must lie in [0, 1]");
  }
  double sum = 0.0;
  for (double r : config.split_ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("split_ratios", "each ratio must lie in [0, 1]");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split_ratios", "must sum to 1 (got " + std::to_string(sum) + ")");
  }
  if (!std::isfinite(config.center_norm) || config.center_norm < 0.0) {
    throw ConfigError("center_norm", "must be finite and >= 0");
  }
  if (!std::isfinite(config.noise_scale) || config.noise_scale < 0.0) {
    throw ConfigError("noise_scale", "must be finite and >= 0");
  }
}

std::pair<Corpus, EmbeddingSet> generate_synthetic(const SyntheticConfig& config,
                                                   std::uint64_t seed) {
  validate(config);
  const std::size_t n_cat = config.n_categories;
  const std::size_t per_cat = config.events_per_category;
  const std::size_t dim = config.dim;

  CounterRng mean_rng(seed, rng_stream::kSyntheticMeans);
  CounterRng event_rng(seed, rng_stream::kSyntheticEvents);
  CounterRng assign_rng(seed, rng_stream::kSyntheticAssignments);

  std::vector<double> offset(dim, 0.0);
  if (config.center_norm > 0.0) {
    offset = random_unit(mean_rng, dim);
    for (auto& x : offset) x *= config.center_norm;
  }
  const auto dirs = directions(mean_rng, n_cat, dim);
  const double radius = config.cluster_separation / std::sqrt(2.0);

  std::vector<EmotionCategory> categories;
  EmbeddingSet set;
  set.model_tag = "synthetic-gaussian";
  set.labels.matrix = EmbeddingMatrix(n_cat, dim);
  set.events.matrix = EmbeddingMatrix(n_cat * per_cat, dim);

  std::vector<EmotionalEvent> events;
  events.reserve(n_cat * per_cat);

  const auto n_dup = static_cast<std::size_t>(
      std::floor(config.duplicate_fraction * static_cast<double>(per_cat)));
  const std::size_t n_unique = per_cat - n_dup;
  const std::size_t n_train = std::min(per_cat, rounded_count(config.split_ratios[0], per_cat));
  const std::size_t n_valid =
      std::min(per_cat - n_train, rounded_count(config.split_ratios[1], per_cat));
  const std::size_t n_explicit = std::min(per_cat, rounded_count(config.explicit_fraction, per_cat));

  for (std::size_t c = 0; c < n_cat; ++c) {
    const std::string name = synthetic_category_name(c);
    categories.push_back({name, name});
    set.labels.ids.push_back(name);

    auto label_row = set.labels.matrix.row(c);
    std::vector<double> mean(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      mean[k] = offset[k] + radius * dirs[c][k];
      label_row[k] = static_cast<float>(mean[k]);
    }

    std::vector<std::size_t> order(per_cat);
    std::iota(order.begin(), order.end(), 0);
    assign_rng.shuffle(std::span(order));
    std::vector<Split> split_of(per_cat, Split::kTest);
    for (std::size_t i = 0; i < n_train; ++i) split_of[order[i]] = Split::kTrain;
    for (std::size_t i = n_train; i < n_train + n_valid; ++i) split_of[order[i]] = Split::kValid;

    std::iota(order.begin(), order.end(), 0);
    assign_rng.shuffle(std::span(order));
    std::vector<bool> explicit_of(per_cat, false);
    for (std::size_t i = 0; i < n_explicit; ++i) explicit_of[order[i]] = true;

    const std::size_t first_row = events.size();
    for (std::size_t k = 0; k < per_cat; ++k) {
      const std::size_t row = events.size();
      char id[32];
      std::snprintf(id, sizeof id, "e%06zu", row);
      EmotionalEvent e;
      e.id = id;
      e.emotion = name;
      e.explicit_flag = explicit_of[k];
      e.split = split_of[k];
      auto dst = set.events.matrix.row(row);
      if (k < n_unique) {
        e.text = "synthetic " + name + " event " + std::to_string(k);
        for (std::size_t j = 0; j < dim; ++j) {
          dst[j] = static_cast<float>(mean[j] + config.noise_scale * event_rng.normal());
        }
      } else {
        const std::size_t source = first_row + static_cast<std::size_t>(assign_rng.below(n_unique));
        e.text = events[source].text;
        const auto src = set.events.matrix.row(source);
        std::copy(src.begin(), src.end(), dst.begin());
      }
      set.events.ids.push_back(e.id);
      events.push_back(std::move(e));
    }
  }

  std::string source_tag = "synthetic-seed-" + std::to_string(seed);
  return {make_corpus(std::move(categories), std::move(events), std::move(source_tag)),
          std::move(set)};
}

}  // namespace emoprobe
