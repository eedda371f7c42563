#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spanlab/corpus.hpp"

namespace spanlab {

/// Bumped whenever the feature templates below change; models record it.
inline constexpr std::string_view kFeatureTemplateVersion = "spanlab-features-v1";

/// A description and the area-of-law label it is tagged for. Views the
/// caller's storage.
struct LabeledInput {
  std::span<const std::string> words;
  std::string_view label;
};

inline LabeledInput labeled_input(const InputAnnotations& input) {
  return {input.words(), input.label};
}

struct FeatureSequence {
  std::string template_version{kFeatureTemplateVersion};
  std::vector<std::vector<std::string>> positions;

  std::size_t size() const { return positions.size(); }
};

/// Per position: bias, label identity, lowercased words at offsets -1/0/+1,
/// prefixes and suffixes of length 1-3, shape flags, and every lexical or
/// shape feature again conjoined with the label.
FeatureSequence extract_features(const LabeledInput& input);

}  // namespace spanlab
