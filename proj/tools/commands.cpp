#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "digest.hpp"
#include "emoprobe/checkpoint.hpp"
#include "emoprobe/errors.hpp"
#include "emoprobe/evaluate.hpp"
#include "emoprobe/report.hpp"
#include "emoprobe/retrieval.hpp"
#include "run_manifest.hpp"

namespace emoprobe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const Error*>(&e)) return kExitValidation;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitValidation;
  return kExitValidation;
}

fs::path resolve_out_dir(const std::optional<fs::path>& out, const std::string& subcommand) {
  if (out && !out->empty()) return *out;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    return fs::path(env) / subcommand;
  }
  throw ConfigError("out", std::string("no --out given and ") + kOutputDirEnv + " is unset");
}

namespace {

std::string tool_version() { return EMOPROBE_VERSION_STRING; }

std::string path_string(const fs::path& p) { return fs::absolute(p).lexically_normal().string(); }

json optional_path(const std::optional<fs::path>& p) {
  return p ? json(path_string(*p)) : json(nullptr);
}

std::optional<fs::path> optional_path(const json& j) {
  if (j.is_null()) return std::nullopt;
  return fs::path(j.get<std::string>());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

std::vector<FileDigest> digest_outputs(const fs::path& dir) {
  auto digests = digest_inputs("out", dir);
  for (auto& d : digests) d.path = fs::relative(d.path, dir).generic_string();
  return digests;
}

void finish_run(RunManifest manifest, const fs::path& out_dir) {
  manifest.outputs = digest_outputs(out_dir);
  manifest.tool_version = tool_version();
  manifest.created_at = utc_now_iso8601();
  write_run_manifest(manifest, out_dir / kRunManifestName);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json synth_config_json(const SynthOptions& o) {
  const auto& c = o.config;
  return {{"n_categories", c.n_categories},
          {"events_per_category", c.events_per_category},
          {"dim", c.dim},
          {"cluster_separation", c.cluster_separation},
          {"duplicate_fraction", c.duplicate_fraction},
          {"explicit_fraction", c.explicit_fraction},
          {"split_ratios", c.split_ratios},
          {"center_norm", c.center_norm},
          {"noise_scale", c.noise_scale},
          {"seed", o.seed}};
}

SynthOptions synth_from_json(const json& j) {
  SynthOptions o;
  o.config.n_categories = j.at("n_categories").get<std::size_t>();
  o.config.events_per_category = j.at("events_per_category").get<std::size_t>();
  o.config.dim = j.at("dim").get<std::size_t>();
  o.config.cluster_separation = j.at("cluster_separation").get<double>();
  o.config.duplicate_fraction = j.at("duplicate_fraction").get<double>();
  o.config.explicit_fraction = j.at("explicit_fraction").get<double>();
  o.config.split_ratios = j.at("split_ratios").get<std::array<double, 3>>();
  o.config.center_norm = j.at("center_norm").get<double>();
  o.config.noise_scale = j.at("noise_scale").get<double>();
  o.seed = j.at("seed").get<std::uint64_t>();
  return o;
}

json train_config_json(const TrainOptions& o) {
  const auto& c = o.config;
  return {{"corpus", path_string(o.corpus)},
          {"categories", optional_path(o.categories)},
          {"embeddings", path_string(o.embeddings)},
          {"projection_dim", c.projection_dim},
          {"temperature", c.temperature},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"seed", c.seed},
          {"optimizer", std::string(to_string(c.optimizer))}};
}

TrainOptions train_from_json(const json& j) {
  TrainOptions o;
  o.corpus = j.at("corpus").get<std::string>();
  o.categories = optional_path(j.at("categories"));
  o.embeddings = j.at("embeddings").get<std::string>();
  o.config.projection_dim = j.at("projection_dim").get<std::size_t>();
  o.config.temperature = j.at("temperature").get<double>();
  o.config.learning_rate = j.at("learning_rate").get<double>();
  o.config.batch_size = j.at("batch_size").get<std::size_t>();
  o.config.max_epochs = j.at("max_epochs").get<std::size_t>();
  o.config.patience = j.at("patience").get<std::size_t>();
  o.config.seed = j.at("seed").get<std::uint64_t>();
  o.config.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  return o;
}

json evaluate_config_json(const EvaluateOptions& o) {
  return {{"checkpoint", path_string(o.checkpoint)},
          {"corpus", path_string(o.corpus)},
          {"categories", optional_path(o.categories)},
          {"embeddings", path_string(o.embeddings)},
          {"ks", o.ks},
          {"split", std::string(to_string(o.split))},
          {"timestamp", o.timestamp},
          {"dump_rankings", o.dump_rankings}};
}

EvaluateOptions evaluate_from_json(const json& j) {
  EvaluateOptions o;
  o.checkpoint = j.at("checkpoint").get<std::string>();
  o.corpus = j.at("corpus").get<std::string>();
  o.categories = optional_path(j.at("categories"));
  o.embeddings = j.at("embeddings").get<std::string>();
  o.ks = j.at("ks").get<std::vector<std::size_t>>();
  o.split = parse_split(j.at("split").get<std::string>());
  o.timestamp = j.at("timestamp").get<std::string>();
  o.dump_rankings = j.at("dump_rankings").get<bool>();
  return o;
}

std::vector<FileDigest> corpus_inputs(const fs::path& corpus,
                                      const std::optional<fs::path>& categories) {
  auto inputs = digest_inputs("corpus", corpus);
  if (categories) {
    auto more = digest_inputs("categories", *categories);
    inputs.insert(inputs.end(), more.begin(), more.end());
  }
  return inputs;
}

void append(std::vector<FileDigest>& a, const std::vector<FileDigest>& b) {
  a.insert(a.end(), b.begin(), b.end());
}

}  // namespace

std::string checkpoint_digest(const fs::path& dir) {
  std::string joined;
  for (const char* name : {"metadata.json", "W1.embd", "W1.ids", "W2.embd", "W2.ids"}) {
    joined += name;
    joined += ':';
    joined += sha256_file(dir / name);
    joined += '\n';
  }
  return "sha256:" + sha256_hex(joined);
}

int cmd_synth(const SynthOptions& opts, std::ostream& out) {
  validate(opts.config);
  ensure_dir(opts.out);
  const auto [corpus, embeddings] = generate_synthetic(opts.config, opts.seed);
  write_corpus(corpus, opts.out / "corpus.jsonl", opts.out / "categories.json");
  save_embedding_set(embeddings, opts.out / "embeddings");

  RunManifest manifest;
  manifest.subcommand = "synth";
  manifest.config = synth_config_json(opts);
  manifest.seed = opts.seed;
  finish_run(std::move(manifest), opts.out);
  out << "wrote " << corpus.events.size() << " events in " << corpus.categories.size()
      << " categories to " << opts.out.string() << '\n';
  return kExitOk;
}

int cmd_train(const TrainOptions& opts, std::ostream& out) {
  validate(opts.config);
  RunManifest manifest;
  manifest.subcommand = "train";
  manifest.config = train_config_json(opts);
  manifest.seed = opts.config.seed;
  manifest.inputs = corpus_inputs(opts.corpus, opts.categories);
  append(manifest.inputs, digest_inputs("embeddings", opts.embeddings));

  const Corpus corpus = read_corpus(opts.corpus, opts.categories);
  const EmbeddingSet embeddings = load_embedding_set(opts.embeddings);
  const TrainedProbe probe = train(opts.config, corpus, embeddings);

  ensure_dir(opts.out);
  save_checkpoint(probe, opts.out);
  finish_run(std::move(manifest), opts.out);

  const auto best = probe.trace.valid_loss[probe.trace.best_epoch - 1];
  out << "trained " << probe.trace.stopped_epoch << " epochs; kept epoch "
      << probe.trace.best_epoch << " (" << probe.trace.monitored_split << " loss " << best
      << ")\ncheckpoint: " << opts.out.string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& opts, std::ostream& out) {
  if (opts.ks.empty()) throw ConfigError("k", "at least one cutoff is required");
  for (auto k : opts.ks) {
    if (k == 0) throw ConfigError("k", "cutoffs must be >= 1");
  }
  RunManifest manifest;
  manifest.subcommand = "evaluate";
  manifest.config = evaluate_config_json(opts);
  manifest.inputs = digest_inputs("checkpoint", opts.checkpoint);
  append(manifest.inputs, corpus_inputs(opts.corpus, opts.categories));
  append(manifest.inputs, digest_inputs("embeddings", opts.embeddings));

  const TrainedProbe probe = load_checkpoint(opts.checkpoint);
  const Corpus corpus = read_corpus(opts.corpus, opts.categories);
  const EmbeddingSet embeddings = load_embedding_set(opts.embeddings);
  const auto probe_dim = static_cast<std::size_t>(probe.parameters.input_dim());
  if (probe_dim != embeddings.events.matrix.dim) {
    throw AlignmentError("checkpoint input dim " + std::to_string(probe_dim) +
                         " does not match embedding dim " +
                         std::to_string(embeddings.events.matrix.dim));
  }

  EvaluationOptions eval;
  eval.pool = opts.split;
  eval.checkpoint_ref = checkpoint_digest(opts.checkpoint);
  eval.timestamp = opts.timestamp;
  const EvaluationReport report =
      evaluate_all(probe.parameters, corpus, embeddings, opts.ks, eval);

  ensure_dir(opts.out);
  for (auto format :
       {ReportFormat::kStructured, ReportFormat::kDelimited, ReportFormat::kPlainText}) {
    write_text(opts.out / ("report" + std::string(file_extension(format))),
               render(report, format));
  }
  if (opts.dump_rankings) {
    std::ostringstream dump;
    const auto pool = make_pool(corpus, embeddings, opts.split);
    if (!pool.items.empty()) {
      for (const auto& list : rank_all(probe.parameters, corpus, embeddings, pool)) {
        write_ranked_list(list, dump);
      }
    }
    write_text(opts.out / "rankings.jsonl", dump.str());
  }
  finish_run(std::move(manifest), opts.out);
  out << render(report, ReportFormat::kPlainText);
  return kExitOk;
}

int cmd_validate(const ValidateOptions& opts, std::ostream& out) {
  const Corpus corpus = read_corpus(opts.corpus, opts.categories);
  const EmbeddingSet embeddings = load_embedding_set(opts.embeddings);
  const AlignmentReport report = validate_alignment(embeddings, corpus);
  out << report.describe();
  return report.ok() ? kExitOk : kExitFindings;
}

int cmd_summarize(const SummarizeOptions& opts, std::ostream& out) {
  const Corpus corpus = read_corpus(opts.corpus, opts.categories);
  out << render_distribution(distribution_summary(corpus));
  return kExitOk;
}

int cmd_merge(const MergeOptions& opts, std::ostream& out) {
  if (opts.reports.empty()) throw ConfigError("report", "at least one report is required");
  RunManifest manifest;
  manifest.subcommand = "merge";
  json paths = json::array();
  std::vector<EvaluationReport> reports;
  for (const auto& p : opts.reports) {
    paths.push_back(path_string(p));
    append(manifest.inputs, digest_inputs("report", p));
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open report " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    reports.push_back(parse_structured_report(buf.str()));
  }
  manifest.config = {{"reports", paths}};
  const ComparisonTable table = merge(reports);

  ensure_dir(opts.out);
  write_text(opts.out / "comparison.tsv", render(table, ReportFormat::kDelimited));
  write_text(opts.out / "comparison.txt", render(table, ReportFormat::kPlainText));
  finish_run(std::move(manifest), opts.out);
  out << render(table, ReportFormat::kPlainText);
  return kExitOk;
}

int cmd_rerun(const RerunOptions& opts, std::ostream& out) {
  const RunManifest manifest = read_run_manifest(opts.manifest);
  for (const auto& input : manifest.inputs) {
    const auto actual = sha256_file(input.path);
    if (actual != input.sha256) {
      throw AlignmentError("input " + input.path + " changed since the recorded run");
    }
  }
  try {
    if (manifest.subcommand == "synth") {
      auto o = synth_from_json(manifest.config);
      o.out = opts.out;
      return cmd_synth(o, out);
    }
    if (manifest.subcommand == "train") {
      auto o = train_from_json(manifest.config);
      o.out = opts.out;
      return cmd_train(o, out);
    }
    if (manifest.subcommand == "evaluate") {
      auto o = evaluate_from_json(manifest.config);
      o.out = opts.out;
      return cmd_evaluate(o, out);
    }
    if (manifest.subcommand == "merge") {
      MergeOptions o;
      for (const auto& p : manifest.config.at("reports")) o.reports.emplace_back(p.get<std::string>());
      o.out = opts.out;
      return cmd_merge(o, out);
    }
  } catch (const json::exception& err) {
    throw FormatError(opts.manifest.string() + ": " + err.what());
  }
  throw FormatError("cannot re-run subcommand '" + manifest.subcommand + "'");
}

}  // namespace emoprobe::cli
