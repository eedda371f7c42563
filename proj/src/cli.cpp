#include "spanlab/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "spanlab/aggregate.hpp"
#include "spanlab/corpus.hpp"
#include "spanlab/evaluate.hpp"
#include "spanlab/experiment.hpp"
#include "spanlab/synth.hpp"
#include "spanlab/tagger.hpp"

namespace spanlab {

namespace {

/// Writes to a file when a path is given, otherwise to `fallback`.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

std::vector<InputKey> keys_of(const Corpus& corpus) {
  std::vector<InputKey> keys;
  for (const auto& input : corpus.inputs) keys.push_back(input.key());
  return keys;
}

std::string percent(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.1f", 100.0 * v);
  return buffer;
}

std::string report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["level"] = to_string(report.level);
  j["gold_type"] = to_string(report.gold_type);
  j["precision"] = report.scores.precision;
  j["recall"] = report.scores.recall;
  j["f1"] = report.scores.f1;
  j["matched"] = report.totals.matched;
  j["predicted"] = report.totals.predicted;
  j["gold"] = report.totals.gold;
  return j.dump();
}

void print_report(const EvalReport& report, const Corpus& corpus, bool per_input, std::ostream& out) {
  char line[512];
  out << "level: " << to_string(report.level) << "  gold: " << to_string(report.gold_type)
      << "  inputs: " << corpus.inputs.size() << '\n';
  std::snprintf(line, sizeof line, "%10s %10s %10s\n%10s %10s %10s\n", "Precision", "Recall", "F1",
                percent(report.scores.precision).c_str(), percent(report.scores.recall).c_str(),
                percent(report.scores.f1).c_str());
  out << line;
  if (per_input) {
    for (const auto& r : report.per_input) {
      const Scores s = prf(r.counts);
      std::snprintf(line, sizeof line, "%s\t%s\t%ld\t%ld\t%ld\t%s\t%s\t%s\n", to_string(r.key).c_str(),
                    r.annotator_id.empty() ? "-" : r.annotator_id.c_str(), r.counts.matched, r.counts.predicted,
                    r.counts.gold, percent(s.precision).c_str(), percent(s.recall).c_str(), percent(s.f1).c_str());
      out << line;
    }
  }
  out << report_json(report) << '\n';
}

const std::map<std::string, ValidationPolicy> kPolicies = {{"annotator-input", ValidationPolicy::AnnotatorInput},
                                                           {"lenient", ValidationPolicy::Lenient}};

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"spanlab: span prediction under annotator disagreement", "spanlab"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string corpus_path, out_path, config_path, truth_path, pred_path, model_path, dev_path, json_path,
      conll_path;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> seed_override;

  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-annotator corpus");
  synth->add_option("--config", config_path, "key = value generator config")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", out_path, "Corpus JSONL to write")->required();
  synth->add_option("--truth", truth_path, "True spans as predictions JSONL");
  synth->add_option("--seed", seed_override, "Override the config seed");

  ValidationPolicy policy = ValidationPolicy::AnnotatorInput;
  auto* validate_cmd = app.add_subcommand("validate", "Report corpus invariant violations");
  validate_cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--policy", policy, "annotator-input or lenient")
      ->transform(CLI::CheckedTransformer(kPolicies, CLI::ignore_case));

  int k = kDefaultFolds;
  double dev_fraction = kDefaultDevFraction;
  auto* split = app.add_subcommand("split", "Document-level k-fold split with a dev portion");
  split->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  split->add_option("--k", k, "Number of folds")->check(CLI::PositiveNumber);
  split->add_option("--dev-fraction", dev_fraction)->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", seed);
  split->add_option("--out", out_path, "Fold plan JSON (default stdout)");

  auto* aggregate = app.add_subcommand("aggregate", "Majority-voted spans per input");
  aggregate->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  aggregate->add_option("--out", out_path, "Predictions JSONL (default stdout)");

  auto* baseline = app.add_subcommand("baseline", "Random start/continue/outside tagger");
  baseline->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  baseline->add_option("--seed", seed);
  baseline->add_option("--out", out_path, "Predictions JSONL (default stdout)");

  Hyperparams hp;
  bool tune_flag = false;
  bool unconstrained = false;
  auto* train_cmd = app.add_subcommand("train", "Train the CRF tagger");
  std::string mode_name, level_name, gold_name;
  train_cmd->add_option("--mode", mode_name, "mv or rel")->required()->check(CLI::IsMember({"mv", "rel"}));
  train_cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", dev_path, "Development corpus for tuning")->check(CLI::ExistingFile);
  auto* lr_opt = train_cmd->add_option("--lr", hp.learning_rate)->check(CLI::PositiveNumber);
  auto* batch_opt = train_cmd->add_option("--batch", hp.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", hp.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--l2", hp.l2)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--seed", seed);
  auto* tune_opt = train_cmd->add_flag("--tune", tune_flag, "Tune learning rate and batch size on --dev");
  tune_opt->excludes(lr_opt)->excludes(batch_opt);
  train_cmd->add_flag("--unconstrained", unconstrained, "Allow tag transitions that need repair");
  train_cmd->add_option("--out", model_path, "Model file to write")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Tag a corpus with a trained model");
  predict_cmd->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", out_path, "Predictions JSONL (default stdout)");

  bool per_input = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predictions against gold spans");
  evaluate_cmd->add_option("--level", level_name, "span or word")->required()->check(CLI::IsMember({"span", "word"}));
  evaluate_cmd->add_option("--gold", gold_name, "majority or best-matched")
      ->required()
      ->check(CLI::IsMember({"majority", "best-matched"}));
  evaluate_cmd->add_option("--pred", pred_path)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_flag("--per-input", per_input);
  evaluate_cmd->add_option("--json", json_path, "Also write the JSON report here");
  evaluate_cmd->add_option("--conll", conll_path, "Export majority gold vs prediction in CoNLL format");

  std::vector<std::string> expert_levels;
  auto* expert = app.add_subcommand("expert", "Best-annotator scores against majority gold");
  expert->add_option("--corpus", corpus_path)->required()->check(CLI::ExistingFile);
  expert->add_option("--level", expert_levels, "span and/or word (default both)")->check(CLI::IsMember({"span", "word"}));

  bool tune_every_fold = false;
  std::string experiment_out;
  auto* experiment = app.add_subcommand("experiment", "Cross-validated Random / MV / ReL study");
  experiment->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  experiment->add_option("--corpus", corpus_path, "Override the config corpus path");
  experiment->add_option("--out", experiment_out, "Override the output directory");
  experiment->add_flag("--tune-every-fold", tune_every_fold);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      SynthConfig config;
      NoiseModel noise;
      KeyValueConfig kv = KeyValueConfig::load(config_path);
      read_synth_config(kv, config, noise);
      if (seed_override) config.seed = *seed_override;
      const SynthOutput result = synthesize(config, noise);
      save_corpus(result.corpus, out_path);
      if (!truth_path.empty()) {
        OutputTarget truth_out(truth_path, out);
        write_predictions(truth_predictions(result.truth), truth_order(result.truth), truth_out.stream());
      }
      err << "wrote " << result.corpus.inputs.size() << " inputs to " << out_path << '\n';
    } else if (validate_cmd->parsed()) {
      std::ifstream in(corpus_path);
      if (!in) throw std::runtime_error("cannot read " + corpus_path);
      const Corpus corpus = read_corpus_unchecked(in);
      const auto violations = validate(corpus, policy);
      for (const auto& v : violations) out << v << '\n';
      if (!violations.empty()) {
        err << violations.size() << " violation(s)\n";
        return kExitValidation;
      }
      out << "OK: " << corpus.inputs.size() << " inputs\n";
    } else if (split->parsed()) {
      const FoldPlan plan = split_folds(load_corpus(corpus_path), k, dev_fraction, seed);
      OutputTarget target(out_path, out);
      write_fold_plan(plan, target.stream());
    } else if (aggregate->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      OutputTarget target(out_path, out);
      write_predictions(majority_predictions(corpus), keys_of(corpus), target.stream());
    } else if (baseline->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      Rng rng(seed);
      OutputTarget target(out_path, out);
      write_predictions(random_predictions(corpus, rng), keys_of(corpus), target.stream());
    } else if (train_cmd->parsed()) {
      const TrainingMode mode = parse_training_mode(mode_name);
      const Corpus corpus = load_corpus(corpus_path);
      if (tune_flag) {
        if (dev_path.empty()) throw CLI::RequiredError("--dev (needed by --tune)");
        std::vector<Hyperparams> grid = default_grid();
        for (auto& point : grid) {
          point.epochs = hp.epochs;
          point.l2 = hp.l2;
        }
        const TuneResult tuned = tune(corpus, load_corpus(dev_path), grid, mode, seed, !unconstrained);
        hp = tuned.best;
        err << "tuned: lr=" << hp.learning_rate << " batch=" << hp.batch_size << '\n';
      }
      const CrfModel model = train(corpus, mode, hp, seed, !unconstrained);
      save_model(model, model_path);
      if (!dev_path.empty()) {
        const Corpus dev = load_corpus(dev_path);
        const double f1 = evaluate_corpus(predict_corpus(model, dev), dev, EvalLevel::Word).scores.f1;
        err << "dev word-level F1 vs majority: " << percent(f1) << '\n';
      }
    } else if (predict_cmd->parsed()) {
      const CrfModel model = load_model(model_path);
      const Corpus corpus = load_corpus(corpus_path);
      OutputTarget target(out_path, out);
      write_predictions(predict_corpus(model, corpus), keys_of(corpus), target.stream());
    } else if (evaluate_cmd->parsed()) {
      const EvalLevel level = parse_level(level_name);
      const GoldType gold = parse_gold_type(gold_name);
      const Corpus corpus = load_corpus(corpus_path);
      const Predictions predictions = load_predictions(pred_path);
      const EvalReport report = evaluate(predictions, corpus, level, gold);
      print_report(report, corpus, per_input, out);
      if (!json_path.empty()) {
        OutputTarget target(json_path, out);
        target.stream() << report_json(report) << '\n';
      }
      if (!conll_path.empty()) {
        std::vector<ConllSequence> sequences;
        for (const auto& input : corpus.inputs) {
          sequences.push_back({input.words(), encode_spans(majority_vote(input), input.length()),
                               encode_spans(predictions.at(input.key()), input.length())});
        }
        OutputTarget target(conll_path, out);
        export_conll(sequences, target.stream());
      }
    } else if (expert->parsed()) {
      const Corpus corpus = load_corpus(corpus_path);
      if (expert_levels.empty()) expert_levels = {"span", "word"};
      for (const auto& l : expert_levels) print_report(expert_estimate(corpus, parse_level(l)), corpus, false, out);
    } else if (experiment->parsed()) {
      KeyValueConfig kv = KeyValueConfig::load(config_path);
      ExperimentSpec spec = read_experiment_config(kv);
      if (!corpus_path.empty()) spec.corpus_path = corpus_path;
      if (!experiment_out.empty()) spec.out_dir = experiment_out;
      if (tune_every_fold) spec.tune_every_fold = true;
      if (spec.corpus_path.empty()) throw ConfigError("no corpus given (config key \"corpus\" or --corpus)");
      const Corpus corpus = load_corpus(spec.corpus_path);
      const ExperimentResult result = run_experiment(spec, corpus);
      write_experiment_outputs(spec, result, spec.out_dir);
      out << results_table(spec, result);
    }
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace spanlab
