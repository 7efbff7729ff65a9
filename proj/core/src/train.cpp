#include "emoprobe/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "emoprobe/errors.hpp"
#include "emoprobe/rng.hpp"

namespace emoprobe {

std::string_view to_string(Optimizer opt) {
  return opt == Optimizer::kAdam ? "adam" : "sgd";
}

Optimizer parse_optimizer(std::string_view text) {
  if (text == "sgd") return Optimizer::kSgd;
  if (text == "adam") return Optimizer::kAdam;
  throw ConfigError("optimizer", "unknown optimizer '" + std::string(text) +
                                     "' (expected sgd or adam)");
}

void validate(const TrainConfig& config) {
  if (!(config.temperature > 0.0) || !std::isfinite(config.temperature)) {
    throw ConfigError("temperature", "must be finite and > 0");
  }
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning_rate", "must be finite and > 0");
  }
  if (config.batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
  if (config.max_epochs == 0) throw ConfigError("max_epochs", "must be >= 1");
  if (config.patience == 0) throw ConfigError("patience", "must be >= 1");
}

std::size_t resolved_projection_dim(const TrainConfig& config, std::size_t input_dim) {
  return config.projection_dim != 0 ? config.projection_dim
                                    : std::min<std::size_t>(input_dim, 256);
}

SplitData gather_split(const Corpus& corpus, const EmbeddingSet& embeddings, Split split) {
  const auto dim = static_cast<Eigen::Index>(embeddings.events.matrix.dim);
  std::unordered_map<std::string, std::size_t> category_index;
  SplitData data;
  data.anchors.resize(static_cast<Eigen::Index>(corpus.categories.size()), dim);
  for (std::size_t c = 0; c < corpus.categories.size(); ++c) {
    const auto& name = corpus.categories[c].name;
    category_index.emplace(name, c);
    const auto row = embeddings.labels.find(name);
    if (row == LabeledMatrix::npos) {
      throw AlignmentError("missing label embedding for '" + name + "'");
    }
    const auto values = embeddings.labels.matrix.row(row);
    for (Eigen::Index k = 0; k < dim; ++k) {
      data.anchors(static_cast<Eigen::Index>(c), k) = values[static_cast<std::size_t>(k)];
    }
    data.anchor_category.push_back(c);
  }

  std::unordered_map<std::string, std::size_t> event_row;
  for (std::size_t i = 0; i < embeddings.events.ids.size(); ++i) {
    event_row.emplace(embeddings.events.ids[i], i);
  }
  const auto members = corpus.events_in(split);
  data.events.resize(static_cast<Eigen::Index>(members.size()), dim);
  for (std::size_t r = 0; r < members.size(); ++r) {
    const auto it = event_row.find(members[r]->id);
    if (it == event_row.end()) {
      throw AlignmentError("missing embedding for event '" + members[r]->id + "'");
    }
    const auto values = embeddings.events.matrix.row(it->second);
    for (Eigen::Index k = 0; k < dim; ++k) {
      data.events(static_cast<Eigen::Index>(r), k) = values[static_cast<std::size_t>(k)];
    }
    data.event_category.push_back(category_index.at(members[r]->emotion));
  }
  return data;
}

namespace {

struct AdamState {
  Eigen::MatrixXd m1, v1, m2, v2;
  std::size_t step = 0;
};

void apply_update(ProbeParameters& params, const LossAndGradient& grad,
                  const TrainConfig& config, AdamState& adam) {
  if (config.optimizer == Optimizer::kSgd) {
    params.label_projection -= config.learning_rate * grad.label_projection;
    params.event_projection -= config.learning_rate * grad.event_projection;
  } else {
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    if (adam.step == 0) {
      adam.m1 = Eigen::MatrixXd::Zero(params.label_projection.rows(), params.label_projection.cols());
      adam.v1 = adam.m1;
      adam.m2 = adam.m1;
      adam.v2 = adam.m1;
    }
    ++adam.step;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.step));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.step));
    auto step = [&](Eigen::MatrixXd& w, Eigen::MatrixXd& m, Eigen::MatrixXd& v,
                    const Eigen::MatrixXd& g) {
      m = kBeta1 * m + (1.0 - kBeta1) * g;
      v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
      w.array() -= config.learning_rate * (m.array() / c1) /
                   ((v.array() / c2).sqrt() + kEps);
    };
    step(params.label_projection, adam.m1, adam.v1, grad.label_projection);
    step(params.event_projection, adam.m2, adam.v2, grad.event_projection);
  }
  // Parameters live on the float32 grid; optimizer state stays double.
  round_to_float32(params);
}

std::size_t count_categories(const std::vector<std::size_t>& cats) {
  std::vector<std::size_t> sorted = cats;
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

}  // namespace

TrainedProbe train(const TrainConfig& config, const Corpus& corpus,
                   const EmbeddingSet& embeddings) {
  validate(config);
  require_alignment(embeddings, corpus);

  const SplitData train_data = gather_split(corpus, embeddings, Split::kTrain);
  const SplitData valid_data = gather_split(corpus, embeddings, Split::kValid);
  if (count_categories(train_data.event_category) < 2) {
    throw AlignmentError(
        "contrastive training needs training events in at least 2 categories");
  }

  const auto input_dim = embeddings.events.matrix.dim;
  TrainedProbe result;
  result.config = config;
  result.source_tag = corpus.source_tag;
  result.model_tag = embeddings.model_tag;

  ProbeParameters params = init_parameters(
      input_dim, resolved_projection_dim(config, input_dim), config.temperature, config.seed);

  const ContrastiveBatch valid_batch = make_batch(
      valid_data.anchors, valid_data.anchor_category, valid_data.events, valid_data.event_category);
  const bool monitor_valid = valid_batch.anchor_count() > 0;
  TrainingTrace& trace = result.trace;
  trace.monitored_split = monitor_valid ? "valid" : "train";
  if (monitor_valid) trace.initial_valid_loss = supcon_loss(params, valid_batch);

  CounterRng shuffle_rng(config.seed, rng_stream::kTrainShuffle);
  std::vector<std::size_t> order(static_cast<std::size_t>(train_data.events.rows()));
  std::iota(order.begin(), order.end(), 0);

  AdamState adam;
  ProbeParameters best = params;
  double best_loss = 0.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(stop - start), train_data.events.cols());
      std::vector<std::size_t> cats;
      for (std::size_t k = start; k < stop; ++k) {
        rows.row(static_cast<Eigen::Index>(k - start)) =
            train_data.events.row(static_cast<Eigen::Index>(order[k]));
        cats.push_back(train_data.event_category[order[k]]);
      }
      const ContrastiveBatch batch =
          make_batch(train_data.anchors, train_data.anchor_category, rows, cats);
      const LossAndGradient grad = supcon_gradient(params, batch);
      if (!std::isfinite(grad.loss) || !grad.label_projection.allFinite() ||
          !grad.event_projection.allFinite()) {
        throw DivergenceError(epoch);
      }
      apply_update(params, grad, config, adam);
      if (!params.label_projection.allFinite() || !params.event_projection.allFinite()) {
        throw DivergenceError(epoch);
      }
      loss_sum += grad.loss;
      ++batches;
    }
    const double train_loss = loss_sum / static_cast<double>(batches);
    const double monitored = monitor_valid ? supcon_loss(params, valid_batch) : train_loss;
    if (!std::isfinite(monitored)) throw DivergenceError(epoch);
    trace.train_loss.push_back(train_loss);
    trace.valid_loss.push_back(monitored);
    trace.stopped_epoch = epoch;

    if (epoch == 1 || monitored < best_loss) {
      best_loss = monitored;
      best = params;
      trace.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  result.parameters = std::move(best);
  return result;
}

}  // namespace emoprobe
