#pragma once

#include <span>
#include <vector>

#include "spanlab/corpus.hpp"

namespace spanlab {

/// How many annotators cover each word.
struct VoteProfile {
  std::vector<int> counts;  // counts[i - 1] for word i
  int total = 0;
};

/// Throws std::invalid_argument on an empty record list or out-of-range span.
VoteProfile word_vote_counts(std::span<const AnnotationRecord> records, int n);

/// Strict per-word majority: a word is kept when more than half of the
/// annotators cover it (exactly half is not enough). Maximal runs of kept
/// words become spans, so differently bounded spans can merge.
SpanSet majority_vote(std::span<const AnnotationRecord> records, int n);

inline SpanSet majority_vote(const InputAnnotations& input) {
  return majority_vote(input.records, input.length());
}

/// Majority spans for every input, keyed by input.
Predictions majority_predictions(const Corpus& corpus);

}  // namespace spanlab
