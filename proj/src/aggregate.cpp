#include "spanlab/aggregate.hpp"

#include <stdexcept>

namespace spanlab {

VoteProfile word_vote_counts(std::span<const AnnotationRecord> records, int n) {
  if (records.empty()) throw std::invalid_argument("cannot aggregate zero annotation records");
  VoteProfile profile{std::vector<int>(static_cast<std::size_t>(n), 0),
                      static_cast<int>(records.size())};
  for (const auto& record : records) {
    std::vector<bool> covered(static_cast<std::size_t>(n), false);
    for (const Span& s : record.spans) {
      if (s.begin < 1 || s.end > n || s.begin > s.end) {
        throw std::invalid_argument("span " + to_string(s) + " out of bounds for n=" +
                                    std::to_string(n));
      }
      for (int i = s.begin; i <= s.end; ++i) covered[static_cast<std::size_t>(i - 1)] = true;
    }
    for (std::size_t i = 0; i < covered.size(); ++i) profile.counts[i] += covered[i] ? 1 : 0;
  }
  return profile;
}

SpanSet majority_vote(std::span<const AnnotationRecord> records, int n) {
  const VoteProfile profile = word_vote_counts(records, n);
  std::vector<bool> kept(profile.counts.size());
  for (std::size_t i = 0; i < kept.size(); ++i) kept[i] = 2 * profile.counts[i] > profile.total;
  return runs_to_spans(kept);
}

Predictions majority_predictions(const Corpus& corpus) {
  Predictions out;
  for (const auto& input : corpus.inputs) out.emplace(input.key(), majority_vote(input));
  return out;
}

}  // namespace spanlab
