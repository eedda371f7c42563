#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spanlab/config.hpp"
#include "spanlab/corpus.hpp"
#include "spanlab/evaluate.hpp"
#include "spanlab/tagger.hpp"

namespace spanlab {

enum class Method { Random, MV, ReL };

std::string_view to_string(Method method);  // "random" / "mv" / "rel"
Method parse_method(std::string_view text);

struct ExperimentSpec {
  std::string corpus_path;
  int k = kDefaultFolds;
  double dev_fraction = kDefaultDevFraction;
  std::uint64_t split_seed = 1;
  std::vector<Method> methods = {Method::Random, Method::MV, Method::ReL};
  std::vector<EvalLevel> levels = {EvalLevel::Span, EvalLevel::Word};
  std::vector<GoldType> golds = {GoldType::Majority, GoldType::BestMatched};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::vector<double> learning_rates = {0.01, 0.05, 0.1, 0.5};
  std::vector<int> batch_sizes = {1, 8, 32};
  int epochs = 10;
  double l2 = 1e-4;
  bool constrained = true;
  bool tune_every_fold = false;
  std::string out_dir = "results";

  std::vector<Hyperparams> grid() const;
};

/// Throws ConfigError on unknown keys or invalid values.
ExperimentSpec read_experiment_config(KeyValueConfig& kv);
void check_spec(const ExperimentSpec& spec);

/// Called with every corpus the driver trains or tunes on.
class ExperimentObserver {
 public:
  virtual ~ExperimentObserver() = default;
  virtual void on_training_data(int fold, std::string_view purpose, const Corpus& data) = 0;
};

struct RunScores {
  Method method;
  std::uint64_t seed;
  GoldType gold;
  EvalLevel level;
  MatchCounts counts;
  Scores scores;
};

struct SummaryRow {
  Method method;
  GoldType gold;
  EvalLevel level;
  Scores mean;
  Scores std;  // sample standard deviation across seeds
};

struct TunedChoice {
  int fold;
  Method method;
  Hyperparams chosen;
  std::vector<double> dev_word_f1;
};

struct FoldPredictions {
  Method method;
  std::uint64_t seed;
  int fold;
  std::vector<InputKey> order;
  Predictions predictions;
};

struct ExperimentResult {
  std::vector<TunedChoice> tuning;
  std::vector<RunScores> runs;
  std::vector<SummaryRow> summary;
  std::vector<EvalReport> expert;  // one per level, majority gold
  std::vector<FoldPredictions> fold_predictions;
};

ExperimentResult run_experiment(const ExperimentSpec& spec, const Corpus& corpus,
                                ExperimentObserver* observer = nullptr);

/// results.json, results.txt, resolved.cfg and predictions/<method>_seed<S>_fold<F>.jsonl.
void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentResult& result,
                              const std::string& out_dir);

std::string results_json(const ExperimentSpec& spec, const ExperimentResult& result);
std::string results_table(const ExperimentSpec& spec, const ExperimentResult& result);
std::string resolved_config(const ExperimentSpec& spec);

/// "17.9 (1.9)": percentage and std to one decimal.
std::string format_mean_std(double mean, double std);

}  // namespace spanlab
