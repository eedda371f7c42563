#pragma once

#include <span>
#include <string>
#include <vector>

#include "spanlab/corpus.hpp"

namespace spanlab {

enum class EvalLevel { Span, Word };
enum class GoldType { Majority, BestMatched };

std::string_view to_string(EvalLevel level);
std::string_view to_string(GoldType gold);
EvalLevel parse_level(std::string_view text);
GoldType parse_gold_type(std::string_view text);

/// Units are spans at span level and words at word level.
struct MatchCounts {
  long matched = 0;
  long predicted = 0;
  long gold = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    matched += o.matched;
    predicted += o.predicted;
    gold += o.gold;
    return *this;
  }
  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct InputResult {
  InputKey key;
  std::string annotator_id;  // winning annotator for best-matched and expert reports
  MatchCounts counts;
};

struct EvalReport {
  EvalLevel level = EvalLevel::Span;
  GoldType gold_type = GoldType::Majority;
  MatchCounts totals;
  Scores scores;
  std::vector<InputResult> per_input;
};

MatchCounts match_counts(const SpanSet& pred, const SpanSet& gold, int n, EvalLevel level);

/// Precision, recall and F1. Empty prediction against empty gold scores 1 on
/// all three; otherwise a zero denominator gives 0.
Scores prf(const MatchCounts& counts);

/// Micro-averaged scores against majority-voted gold.
EvalReport evaluate_corpus(const Predictions& predictions, const Corpus& corpus, EvalLevel level);

struct BestMatch {
  std::string annotator_id;
  MatchCounts counts;
};

/// The annotator whose spans give `pred` the highest F1; ties go to the
/// lexicographically smallest annotator_id.
BestMatch best_match_select(const SpanSet& pred, std::span<const AnnotationRecord> records, int n,
                            EvalLevel level);

EvalReport evaluate_best_matched(const Predictions& predictions, const Corpus& corpus,
                                 EvalLevel level);

EvalReport evaluate(const Predictions& predictions, const Corpus& corpus, EvalLevel level,
                    GoldType gold);

/// Scores each input's best annotator (highest F1 against the majority
/// vote) as if it were a prediction.
EvalReport expert_estimate(const Corpus& corpus, EvalLevel level);

}  // namespace spanlab
