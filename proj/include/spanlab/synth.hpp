#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spanlab/config.hpp"
#include "spanlab/corpus.hpp"
#include "spanlab/rng.hpp"

namespace spanlab {

struct SynthConfig {
  int n_docs = 100;
  int vocab_size = 500;
  int doc_length_min = 20;
  int doc_length_max = 40;
  std::vector<std::string> labels = {"EMPLOYMENT", "HOUSING", "FAMILY", "DEBT",
                                     "CONSUMER",   "ELDER",   "CRIME",  "IMMIGRATION"};
  double labels_per_doc = 3.0;
  int spans_per_input_min = 1;
  int spans_per_input_max = 2;
  int span_length_min = 3;
  int span_length_max = 6;
  int annotators_per_input = 5;
  /// Chance that a word inside a true span is replaced by one of its
  /// label's trigger words.
  double trigger_rate = 0.8;
  int triggers_per_label = 5;
  std::uint64_t seed = 1;
};

/// Annotator disagreement. All zero means every annotator copies the truth.
struct NoiseModel {
  double p_drop = 0.0;
  int jitter = 0;              // maximum boundary shift in words
  double jitter_prob = 0.0;    // per-boundary shift probability
  double p_spurious = 0.0;     // Poisson rate of spurious spans per annotator
  double label_disagreement = 0.0;  // chance an annotator skips the input
};

struct TruthInput {
  std::shared_ptr<const Document> document;
  std::string label;
  SpanSet spans;

  InputKey key() const { return {document->doc_id, label}; }
};

using SynthTruth = std::vector<TruthInput>;

/// Throws std::invalid_argument for invalid or infeasible configurations.
void check_config(const SynthConfig& config);
void check_noise(const NoiseModel& noise);

/// Documents of random "w<k>" words; per (doc, label) input, separated
/// non-overlapping true spans, with trigger words planted inside them.
SynthTruth generate_truth(const SynthConfig& config, Rng& rng);

/// One record per annotator ("a1".."aK"), each a noisy copy of the truth.
/// All spans are at least 3 words and pairwise separated by a gap.
Corpus simulate_annotators(const SynthTruth& truth, const NoiseModel& noise, int annotators_per_input,
                           int span_length_min, int span_length_max, Rng& rng);

/// generate_truth then simulate_annotators, with streams derived from
/// config.seed.
struct SynthOutput {
  SynthTruth truth;
  Corpus corpus;
};
SynthOutput synthesize(const SynthConfig& config, const NoiseModel& noise);

Predictions truth_predictions(const SynthTruth& truth);
std::vector<InputKey> truth_order(const SynthTruth& truth);

/// Reads SynthConfig and NoiseModel keys; unknown keys are errors.
void read_synth_config(KeyValueConfig& kv, SynthConfig& config, NoiseModel& noise);

}  // namespace spanlab
