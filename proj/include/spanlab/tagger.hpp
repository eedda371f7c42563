#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "spanlab/corpus.hpp"
#include "spanlab/crf.hpp"
#include "spanlab/features.hpp"
#include "spanlab/rng.hpp"

namespace spanlab {

enum class TrainingMode { MV, ReL };

std::string_view to_string(TrainingMode mode);  // "mv" / "rel"
TrainingMode parse_training_mode(std::string_view text);

struct Hyperparams {
  double learning_rate = 0.1;
  int batch_size = 8;
  int epochs = 10;
  double l2 = 1e-4;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Learning rates {0.01, 0.05, 0.1, 0.5} x batch sizes {1, 8, 32}.
std::vector<Hyperparams> default_grid();

class TemplateMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using WeightMatrix = EmissionMatrix<double>;  // one row per feature

/// Linear-chain CRF with label-conditioned sparse features.
struct CrfModel {
  std::string template_version{kFeatureTemplateVersion};
  bool constrained = true;
  std::vector<std::string> feature_names;
  WeightMatrix feature_weights;
  TransitionMatrix<double> transitions = TransitionMatrix<double>::Zero();
  TagVector<double> start = TagVector<double>::Zero();
  TagVector<double> end = TagVector<double>::Zero();

  /// Rebuilds the name lookup; call after editing feature_names.
  void reindex();
  /// -1 when unknown.
  int feature_id(const std::string& name) const;
  int num_features() const { return static_cast<int>(feature_names.size()); }

  /// Registers a feature name if absent and returns its id. Call
  /// resize_weights() afterwards to give new features zero weights.
  int add_feature(const std::string& name);
  void resize_weights();

 private:
  std::unordered_map<std::string, int> index_;
};

/// Feature ids active at each position; features unknown to the model are
/// dropped.
using IndexedFeatures = std::vector<std::vector<int>>;

IndexedFeatures index_features(const CrfModel& model, const FeatureSequence& feats);

/// Throws TemplateMismatch when model and features disagree on version.
Potentials<double> log_potentials(const CrfModel& model, const FeatureSequence& feats);
Potentials<double> log_potentials(const CrfModel& model, const IndexedFeatures& feats);

/// Gradient laid out like the model's parameters.
struct Gradient {
  WeightMatrix feature_weights;
  TransitionMatrix<double> transitions = TransitionMatrix<double>::Zero();
  TagVector<double> start = TagVector<double>::Zero();
  TagVector<double> end = TagVector<double>::Zero();
};

struct LossAndGradient {
  double nll = 0.0;
  Gradient gradient;
};

struct TrainingExample {
  IndexedFeatures features;
  TagSequence tags;
};

/// Negative log-likelihood of the gold tags plus (l2/2)||w||^2, and its
/// gradient: expected minus observed feature counts plus l2 * w.
LossAndGradient loss_and_gradient(const CrfModel& model, const TrainingExample& example, double l2);

/// Per-epoch objective recorded during training.
struct TrainingTrace {
  std::vector<double> epoch_objective;  // mean regularized nll after each epoch
};

/// Builds the feature dictionary from the corpus and runs mini-batch SGD
/// with a constant learning rate. MV trains on one example per input
/// (majority-voted tags), ReL on one example per annotation record.
CrfModel train(const Corpus& corpus, TrainingMode mode, const Hyperparams& hp, std::uint64_t seed,
               bool constrained = true, TrainingTrace* trace = nullptr);

/// The training examples `train` would build for a corpus and mode, indexed
/// against `model` (whose dictionary is extended with unseen features).
std::vector<TrainingExample> build_examples(const Corpus& corpus, TrainingMode mode, CrfModel& model);

SpanSet predict(const CrfModel& model, const LabeledInput& input);
Predictions predict_corpus(const CrfModel& model, const Corpus& corpus);

struct TuneResult {
  Hyperparams best;
  std::vector<double> dev_word_f1;  // one per grid point; empty for a singleton grid
};

/// Trains once per grid point and keeps the one with the highest word-level
/// F1 on dev against majority-voted gold; ties keep the earlier point.
TuneResult tune(const Corpus& train_split, const Corpus& dev_split, const std::vector<Hyperparams>& grid,
                TrainingMode mode, std::uint64_t seed, bool constrained = true);

/// Uniform start/continue/outside tag per word, decoded to spans.
SpanSet random_tagger(int n, Rng& rng);
Predictions random_predictions(const Corpus& corpus, Rng& rng);

void save_model(const CrfModel& model, std::ostream& out);
void save_model(const CrfModel& model, const std::string& path);
CrfModel load_model(std::istream& in);
CrfModel load_model(const std::string& path);

}  // namespace spanlab
