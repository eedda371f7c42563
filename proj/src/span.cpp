#include "spanlab/span.hpp"

#include <sstream>

namespace spanlab {

bool is_valid_span_set(const SpanSet& spans, int n) {
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const Span& s = spans[k];
    if (s.begin < 1 || s.begin > s.end || s.end > n) return false;
    if (k > 0 && spans[k - 1].end >= s.begin) return false;
  }
  return true;
}

std::vector<bool> covered_words(const SpanSet& spans, int n) {
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (const Span& s : spans) {
    for (int i = s.begin; i <= s.end; ++i) mask[static_cast<std::size_t>(i - 1)] = true;
  }
  return mask;
}

SpanSet runs_to_spans(const std::vector<bool>& mask) {
  SpanSet spans;
  const int n = static_cast<int>(mask.size());
  int open = 0;
  for (int i = 1; i <= n; ++i) {
    if (mask[static_cast<std::size_t>(i - 1)]) {
      if (open == 0) open = i;
    } else if (open != 0) {
      spans.push_back({open, i - 1});
      open = 0;
    }
  }
  if (open != 0) spans.push_back({open, n});
  return spans;
}

std::string to_string(const Span& span) {
  return "(" + std::to_string(span.begin) + "," + std::to_string(span.end) + ")";
}

std::string to_string(const SpanSet& spans) {
  std::ostringstream out;
  out << '{';
  for (std::size_t k = 0; k < spans.size(); ++k) {
    if (k > 0) out << ',';
    out << to_string(spans[k]);
  }
  out << '}';
  return out.str();
}

}  // namespace spanlab
