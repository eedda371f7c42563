#pragma once

#include <compare>
#include <string>
#include <vector>

namespace spanlab {

/// A contiguous run of words, 1-based and inclusive on both ends.
struct Span {
  int begin = 1;
  int end = 1;

  int length() const { return end - begin + 1; }
  bool contains(int i) const { return begin <= i && i <= end; }

  friend auto operator<=>(const Span&, const Span&) = default;
};

/// Spans sorted by begin and pairwise non-overlapping.
using SpanSet = std::vector<Span>;

/// True when every span lies in [1, n], spans are sorted and do not overlap.
bool is_valid_span_set(const SpanSet& spans, int n);

/// Per-word membership mask of length n (index 0 is word 1).
std::vector<bool> covered_words(const SpanSet& spans, int n);

/// Maximal runs of true entries in a membership mask, as 1-based spans.
SpanSet runs_to_spans(const std::vector<bool>& mask);

std::string to_string(const Span& span);
std::string to_string(const SpanSet& spans);

}  // namespace spanlab
