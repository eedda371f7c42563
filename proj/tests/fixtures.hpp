#pragma once

// Shared test data: the two-annotator dismissal sentence and random
// span-set generators.

#include <string>
#include <vector>

#include "spanlab/corpus.hpp"
#include "spanlab/rng.hpp"

namespace spanlab::testing {

inline std::vector<std::string> dismissal_words() {
  return {"I",         "was",     "fired", "from", "work",   "because", "of",
          "my",        "complaint", "against", "my",  "boss", "months",  "ago"};
}

inline std::vector<AnnotationRecord> dismissal_records() {
  return {{"A1", {{1, 5}, {8, 12}}}, {"A2", {{3, 5}, {9, 14}}}};
}

inline InputAnnotations dismissal_input() {
  return {std::make_shared<const Document>(Document{"d1", dismissal_words()}), "EMPLOYMENT", dismissal_records()};
}

inline Corpus dismissal_corpus() { return Corpus{{dismissal_input()}}; }

/// Sorted, non-overlapping spans (possibly adjacent) in n words.
inline SpanSet random_span_set(Rng& rng, int n, int max_gap = 3, int max_length = 5) {
  SpanSet spans;
  int cursor = 1;
  while (true) {
    cursor += static_cast<int>(rng.uniform_int(0, max_gap));
    if (cursor > n) break;
    const int end = std::min(n, cursor + static_cast<int>(rng.uniform_int(0, max_length - 1)));
    spans.push_back({cursor, end});
    cursor = end + 1;
  }
  return spans;
}

inline std::vector<AnnotationRecord> random_records(Rng& rng, int n, int count) {
  std::vector<AnnotationRecord> records;
  for (int a = 0; a < count; ++a) records.push_back({"a" + std::to_string(a), random_span_set(rng, n)});
  return records;
}

}  // namespace spanlab::testing
