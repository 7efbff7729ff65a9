#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "emoprobe/corpus.hpp"
#include "emoprobe/embedding_store.hpp"
#include "emoprobe/probe.hpp"

namespace emoprobe {

enum class Optimizer { kSgd, kAdam };

std::string_view to_string(Optimizer opt);
Optimizer parse_optimizer(std::string_view text);

struct TrainConfig {
  std::size_t projection_dim = 0;  // 0 selects min(input_dim, 256)
  double temperature = 0.1;
  double learning_rate = 0.05;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 500;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kSgd;

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& config);
std::size_t resolved_projection_dim(const TrainConfig& config, std::size_t input_dim);

struct TrainingTrace {
  std::vector<double> train_loss;  // mean batch loss per epoch
  std::vector<double> valid_loss;  // monitored loss per epoch
  std::optional<double> initial_valid_loss;  // before the first update
  std::size_t stopped_epoch = 0;   // epochs run == train_loss.size()
  std::size_t best_epoch = 0;      // 1-based epoch whose parameters were kept
  // "valid" normally; "train" when the valid split has no usable anchor.
  std::string monitored_split = "valid";

  bool operator==(const TrainingTrace&) const = default;
};

struct TrainedProbe {
  ProbeParameters parameters;
  TrainingTrace trace;
  TrainConfig config;
  std::string source_tag;
  std::string model_tag;
};

// Anchors (one label row per corpus category, in declaration order) and the
// event rows of one split, with category indices.
struct SplitData {
  Eigen::MatrixXd anchors;
  std::vector<std::size_t> anchor_category;
  Eigen::MatrixXd events;
  std::vector<std::size_t> event_category;
};

SplitData gather_split(const Corpus& corpus, const EmbeddingSet& embeddings, Split split);

// Per epoch: shuffle train events, chunk them into batches of batch_size with
// every category anchor attached, take one optimizer step per batch. Stops
// after `patience` epochs without improvement of the validation loss and
// returns the parameters of the best epoch. Throws AlignmentError when the
// inputs do not align or fewer than two categories have training events,
// DivergenceError on a non-finite loss.
TrainedProbe train(const TrainConfig& config, const Corpus& corpus,
                   const EmbeddingSet& embeddings);

}  // namespace emoprobe
