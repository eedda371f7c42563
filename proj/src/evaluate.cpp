#include "spanlab/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

#include "spanlab/aggregate.hpp"

namespace spanlab {

std::string_view to_string(EvalLevel level) { return level == EvalLevel::Span ? "span" : "word"; }

std::string_view to_string(GoldType gold) {
  return gold == GoldType::Majority ? "majority" : "best-matched";
}

EvalLevel parse_level(std::string_view text) {
  if (text == "span") return EvalLevel::Span;
  if (text == "word") return EvalLevel::Word;
  throw std::invalid_argument("unknown evaluation level \"" + std::string(text) + "\"");
}

GoldType parse_gold_type(std::string_view text) {
  if (text == "majority") return GoldType::Majority;
  if (text == "best-matched") return GoldType::BestMatched;
  throw std::invalid_argument("unknown gold type \"" + std::string(text) + "\"");
}

MatchCounts match_counts(const SpanSet& pred, const SpanSet& gold, int n, EvalLevel level) {
  MatchCounts counts;
  if (level == EvalLevel::Span) {
    counts.predicted = static_cast<long>(pred.size());
    counts.gold = static_cast<long>(gold.size());
    // Both sides are sorted, so a merge finds exact matches.
    auto p = pred.begin();
    auto g = gold.begin();
    while (p != pred.end() && g != gold.end()) {
      if (*p == *g) {
        ++counts.matched;
        ++p;
        ++g;
      } else if (*p < *g) {
        ++p;
      } else {
        ++g;
      }
    }
    return counts;
  }
  const auto in_pred = covered_words(pred, n);
  const auto in_gold = covered_words(gold, n);
  for (std::size_t i = 0; i < in_pred.size(); ++i) {
    counts.predicted += in_pred[i];
    counts.gold += in_gold[i];
    counts.matched += in_pred[i] && in_gold[i];
  }
  return counts;
}

Scores prf(const MatchCounts& c) {
  if (c.predicted == 0 && c.gold == 0) return {1.0, 1.0, 1.0};
  Scores s;
  if (c.predicted > 0) s.precision = static_cast<double>(c.matched) / static_cast<double>(c.predicted);
  if (c.gold > 0) s.recall = static_cast<double>(c.matched) / static_cast<double>(c.gold);
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

namespace {

const SpanSet& prediction_for(const Predictions& predictions, const InputAnnotations& input) {
  auto it = predictions.find(input.key());
  if (it == predictions.end()) {
    throw ValidationError("missing prediction for input " + to_string(input.key()));
  }
  if (!is_valid_span_set(it->second, input.length())) {
    throw ValidationError("prediction for " + to_string(input.key()) +
                          " is not a valid span set within N=" + std::to_string(input.length()));
  }
  return it->second;
}

void finish(EvalReport& report) {
  for (const auto& r : report.per_input) report.totals += r.counts;
  report.scores = prf(report.totals);
}

}  // namespace

EvalReport evaluate_corpus(const Predictions& predictions, const Corpus& corpus, EvalLevel level) {
  EvalReport report{level, GoldType::Majority, {}, {}, {}};
  for (const auto& input : corpus.inputs) {
    const SpanSet& pred = prediction_for(predictions, input);
    report.per_input.push_back(
        {input.key(), "", match_counts(pred, majority_vote(input), input.length(), level)});
  }
  finish(report);
  return report;
}

BestMatch best_match_select(const SpanSet& pred, std::span<const AnnotationRecord> records, int n,
                            EvalLevel level) {
  if (records.empty()) throw std::invalid_argument("best_match_select needs at least one record");
  const AnnotationRecord* best = nullptr;
  MatchCounts best_counts;
  double best_f1 = -1.0;
  for (const auto& record : records) {
    const MatchCounts counts = match_counts(pred, record.spans, n, level);
    const double f1 = prf(counts).f1;
    if (f1 > best_f1 || (f1 == best_f1 && record.annotator_id < best->annotator_id)) {
      best = &record;
      best_counts = counts;
      best_f1 = f1;
    }
  }
  return {best->annotator_id, best_counts};
}

EvalReport evaluate_best_matched(const Predictions& predictions, const Corpus& corpus,
                                 EvalLevel level) {
  EvalReport report{level, GoldType::BestMatched, {}, {}, {}};
  for (const auto& input : corpus.inputs) {
    const SpanSet& pred = prediction_for(predictions, input);
    BestMatch best = best_match_select(pred, input.records, input.length(), level);
    report.per_input.push_back({input.key(), std::move(best.annotator_id), best.counts});
  }
  finish(report);
  return report;
}

EvalReport evaluate(const Predictions& predictions, const Corpus& corpus, EvalLevel level,
                    GoldType gold) {
  return gold == GoldType::Majority ? evaluate_corpus(predictions, corpus, level)
                                    : evaluate_best_matched(predictions, corpus, level);
}

EvalReport expert_estimate(const Corpus& corpus, EvalLevel level) {
  EvalReport report{level, GoldType::Majority, {}, {}, {}};
  for (const auto& input : corpus.inputs) {
    if (input.records.empty()) {
      throw std::invalid_argument("input " + to_string(input.key()) + " has no records");
    }
    const SpanSet gold = majority_vote(input);
    const AnnotationRecord* best = nullptr;
    MatchCounts best_counts;
    double best_f1 = -1.0;
    for (const auto& record : input.records) {
      const MatchCounts counts = match_counts(record.spans, gold, input.length(), level);
      const double f1 = prf(counts).f1;
      if (f1 > best_f1 || (f1 == best_f1 && record.annotator_id < best->annotator_id)) {
        best = &record;
        best_counts = counts;
        best_f1 = f1;
      }
    }
    report.per_input.push_back({input.key(), best->annotator_id, best_counts});
  }
  finish(report);
  return report;
}

}  // namespace spanlab
