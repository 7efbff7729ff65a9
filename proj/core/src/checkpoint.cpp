#include "emoprobe/checkpoint.hpp"

#include <fstream>

#include "emoprobe/errors.hpp"
#include "json.hpp"

namespace emoprobe {

using nlohmann::json;

namespace {

LabeledMatrix to_labeled(const Eigen::MatrixXd& w) {
  LabeledMatrix out;
  out.matrix = EmbeddingMatrix(static_cast<std::size_t>(w.rows()),
                               static_cast<std::size_t>(w.cols()));
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    auto row = out.matrix.row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = static_cast<float>(w(i, j));
    }
    out.ids.push_back(std::to_string(i));
  }
  return out;
}

json config_to_json(const TrainConfig& c) {
  return {{"projection_dim", c.projection_dim}, {"temperature", c.temperature},
          {"learning_rate", c.learning_rate},   {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},         {"patience", c.patience},
          {"seed", c.seed},                     {"optimizer", std::string(to_string(c.optimizer))}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.projection_dim = j.at("projection_dim").get<std::size_t>();
  c.temperature = j.at("temperature").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_epochs = j.at("max_epochs").get<std::size_t>();
  c.patience = j.at("patience").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  return c;
}

}  // namespace

void save_checkpoint(const TrainedProbe& probe, const std::filesystem::path& dir) {
  const auto& p = probe.parameters;
  p.validate();
  if (!representable_as_float32(p.label_projection) ||
      !representable_as_float32(p.event_projection)) {
    throw FormatError("checkpoint parameters must be float32-representable");
  }
  std::filesystem::create_directories(dir);

  json trace{{"train_loss", probe.trace.train_loss},
             {"valid_loss", probe.trace.valid_loss},
             {"initial_valid_loss", nullptr},
             {"stopped_epoch", probe.trace.stopped_epoch},
             {"best_epoch", probe.trace.best_epoch},
             {"monitored_split", probe.trace.monitored_split}};
  if (probe.trace.initial_valid_loss) {
    trace["initial_valid_loss"] = *probe.trace.initial_valid_loss;
  }
  json meta{{"format_version", kCheckpointFormatVersion},
            {"input_dim", p.input_dim()},
            {"projection_dim", p.projection_dim()},
            {"temperature", p.temperature},
            {"config", config_to_json(probe.config)},
            {"trace", trace},
            {"provenance", {{"corpus_source_tag", probe.source_tag},
                            {"model_tag", probe.model_tag}}}};

  save_matrix(to_labeled(p.label_projection), dir / "W1.embd");
  save_matrix(to_labeled(p.event_projection), dir / "W2.embd");
  std::ofstream out(dir / "metadata.json", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "metadata.json").string());
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("write failed for checkpoint metadata");
}

TrainedProbe load_checkpoint(const std::filesystem::path& dir) {
  const auto meta_path = dir / "metadata.json";
  std::ifstream in(meta_path);
  if (!in) throw IoError("cannot open checkpoint metadata " + meta_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::parse_error& err) {
    throw FormatError(meta_path.string() + ": " + err.what());
  }

  TrainedProbe probe;
  try {
    const int version = meta.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw FormatError("unsupported checkpoint format version " + std::to_string(version));
    }
    const auto input_dim = meta.at("input_dim").get<std::size_t>();
    const auto projection_dim = meta.at("projection_dim").get<std::size_t>();

    auto load_projection = [&](const char* name) {
      const LabeledMatrix m = load_matrix(dir / name);
      if (m.matrix.count != projection_dim || m.matrix.dim != input_dim) {
        throw FormatError(std::string(name) + " has shape " + std::to_string(m.matrix.count) +
                          "x" + std::to_string(m.matrix.dim) + " but metadata declares " +
                          std::to_string(projection_dim) + "x" + std::to_string(input_dim));
      }
      Eigen::MatrixXd w(static_cast<Eigen::Index>(projection_dim),
                        static_cast<Eigen::Index>(input_dim));
      for (std::size_t i = 0; i < projection_dim; ++i) {
        const auto row = m.matrix.row(i);
        for (std::size_t j = 0; j < input_dim; ++j) {
          w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
        }
      }
      return w;
    };
    probe.parameters.label_projection = load_projection("W1.embd");
    probe.parameters.event_projection = load_projection("W2.embd");
    probe.parameters.temperature = meta.at("temperature").get<double>();
    probe.config = config_from_json(meta.at("config"));

    const auto& t = meta.at("trace");
    probe.trace.train_loss = t.at("train_loss").get<std::vector<double>>();
    probe.trace.valid_loss = t.at("valid_loss").get<std::vector<double>>();
    if (!t.at("initial_valid_loss").is_null()) {
      probe.trace.initial_valid_loss = t.at("initial_valid_loss").get<double>();
    }
    probe.trace.stopped_epoch = t.at("stopped_epoch").get<std::size_t>();
    probe.trace.best_epoch = t.at("best_epoch").get<std::size_t>();
    probe.trace.monitored_split = t.at("monitored_split").get<std::string>();
    if (probe.trace.train_loss.size() != probe.trace.stopped_epoch ||
        probe.trace.valid_loss.size() != probe.trace.stopped_epoch) {
      throw FormatError("trace length does not match stopped_epoch");
    }

    const auto& prov = meta.at("provenance");
    probe.source_tag = prov.at("corpus_source_tag").get<std::string>();
    probe.model_tag = prov.at("model_tag").get<std::string>();
  } catch (const json::exception& err) {
    throw FormatError(meta_path.string() + ": " + err.what());
  } catch (const ConfigError& err) {
    throw FormatError(meta_path.string() + ": " + err.what());
  }
  try {
    probe.parameters.validate();
  } catch (const ConfigError& err) {
    throw FormatError(dir.string() + ": " + err.what());
  }
  return probe;
}

}  // namespace emoprobe
