#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "emoprobe/errors.hpp"

namespace {

using namespace emoprobe;
using namespace emoprobe::cli;

std::array<double, 3> parse_ratios(const std::string& text) {
  std::array<double, 3> out{};
  std::stringstream ss(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ',')) {
    if (i == 3) throw ConfigError("split-ratios", "expected three comma-separated values");
    try {
      std::size_t used = 0;
      out[i++] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw ConfigError("split-ratios", "not a number: '" + part + "'");
    }
  }
  if (i != 3) throw ConfigError("split-ratios", "expected three comma-separated values");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervised contrastive probing of frozen embeddings for emotion retrieval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EMOPROBE_VERSION_STRING);

  // synth
  SynthOptions synth;
  std::optional<std::filesystem::path> synth_out;
  std::string synth_ratios = "0.8,0.1,0.1";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic Gaussian-cluster corpus");
  synth_cmd->add_option("--categories", synth.config.n_categories, "Number of emotion categories")
      ->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  synth_cmd->add_option("--per-category", synth.config.events_per_category, "Events per category")
      ->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--dim", synth.config.dim, "Embedding dimension")
      ->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  synth_cmd->add_option("--separation", synth.config.cluster_separation, "Distance between category means")
      ->capture_default_str();
  synth_cmd->add_option("--duplicate-fraction", synth.config.duplicate_fraction)->capture_default_str();
  synth_cmd->add_option("--explicit-fraction", synth.config.explicit_fraction)->capture_default_str();
  synth_cmd->add_option("--split-ratios", synth_ratios, "train,valid,test")->capture_default_str();
  synth_cmd->add_option("--center-norm", synth.config.center_norm)->capture_default_str();
  synth_cmd->add_option("--noise-scale", synth.config.noise_scale)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "PRNG seed")->required();
  synth_cmd->add_option("--out", synth_out, "Output directory");

  // train
  TrainOptions train_opts;
  std::optional<std::filesystem::path> train_out;
  std::string optimizer = "sgd";
  auto* train_cmd = app.add_subcommand("train", "Train a probe and write a checkpoint");
  train_cmd->add_option("--corpus", train_opts.corpus, "Corpus file (JSON lines)")->required();
  train_cmd->add_option("--categories", train_opts.categories, "Category sidecar document");
  train_cmd->add_option("--embeddings", train_opts.embeddings, "Embedding-set directory")->required();
  train_cmd->add_option("--seed", train_opts.config.seed, "PRNG seed")->required();
  train_cmd->add_option("--projection-dim", train_opts.config.projection_dim, "0 = min(dim, 256)")
      ->capture_default_str();
  train_cmd->add_option("--temperature", train_opts.config.temperature)->capture_default_str();
  train_cmd->add_option("--learning-rate", train_opts.config.learning_rate)->capture_default_str();
  train_cmd->add_option("--batch-size", train_opts.config.batch_size)->capture_default_str();
  train_cmd->add_option("--max-epochs", train_opts.config.max_epochs)->capture_default_str();
  train_cmd->add_option("--patience", train_opts.config.patience)->capture_default_str();
  train_cmd->add_option("--optimizer", optimizer, "sgd or adam")
      ->capture_default_str()->check(CLI::IsMember({"sgd", "adam"}));
  train_cmd->add_option("--out", train_out, "Checkpoint directory");

  // evaluate
  EvaluateOptions eval;
  std::optional<std::filesystem::path> eval_out;
  std::string eval_split = "test";
  auto* eval_cmd = app.add_subcommand("evaluate", "Rank the pool and compute P@K, D@K and rates");
  eval_cmd->add_option("--checkpoint", eval.checkpoint)->required();
  eval_cmd->add_option("--corpus", eval.corpus)->required();
  eval_cmd->add_option("--categories", eval.categories);
  eval_cmd->add_option("--embeddings", eval.embeddings)->required();
  eval_cmd->add_option("--k", eval.ks, "Comma-separated cutoffs")
      ->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--split", eval_split, "Candidate pool split")
      ->capture_default_str()->check(CLI::IsMember({"train", "valid", "test"}));
  eval_cmd->add_option("--timestamp", eval.timestamp, "Timestamp recorded in the report")
      ->capture_default_str();
  eval_cmd->add_flag("--dump-rankings", eval.dump_rankings, "Also write rankings.jsonl");
  eval_cmd->add_option("--out", eval_out, "Report directory");

  // validate
  ValidateOptions val;
  auto* val_cmd = app.add_subcommand("validate", "Check that embeddings align with a corpus");
  val_cmd->add_option("--corpus", val.corpus)->required();
  val_cmd->add_option("--categories", val.categories);
  val_cmd->add_option("--embeddings", val.embeddings)->required();

  // summarize
  SummarizeOptions sum;
  auto* sum_cmd = app.add_subcommand("summarize", "Print per-split category counts");
  sum_cmd->add_option("--corpus", sum.corpus)->required();
  sum_cmd->add_option("--categories", sum.categories);

  // merge
  MergeOptions merge_opts;
  std::optional<std::filesystem::path> merge_out;
  auto* merge_cmd = app.add_subcommand("merge", "Combine report.json files across models");
  merge_cmd->add_option("--report", merge_opts.reports, "report.json (repeatable)")->required();
  merge_cmd->add_option("--out", merge_out);

  // rerun
  RerunOptions rerun;
  auto* rerun_cmd = app.add_subcommand("rerun", "Reproduce a run from its run_manifest.json");
  rerun_cmd->add_option("--manifest", rerun.manifest)->required();
  rerun_cmd->add_option("--out", rerun.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  return run_guarded(
      [&]() -> int {
        if (*synth_cmd) {
          synth.config.split_ratios = parse_ratios(synth_ratios);
          synth.out = resolve_out_dir(synth_out, "synth");
          return cmd_synth(synth, std::cout);
        }
        if (*train_cmd) {
          train_opts.config.optimizer = parse_optimizer(optimizer);
          train_opts.out = resolve_out_dir(train_out, "train");
          return cmd_train(train_opts, std::cout);
        }
        if (*eval_cmd) {
          eval.split = parse_split(eval_split);
          eval.out = resolve_out_dir(eval_out, "evaluate");
          return cmd_evaluate(eval, std::cout);
        }
        if (*val_cmd) return cmd_validate(val, std::cout);
        if (*sum_cmd) return cmd_summarize(sum, std::cout);
        if (*merge_cmd) {
          merge_opts.out = resolve_out_dir(merge_out, "merge");
          return cmd_merge(merge_opts, std::cout);
        }
        if (*rerun_cmd) return cmd_rerun(rerun, std::cout);
        return kExitUsage;
      },
      std::cerr);
}
