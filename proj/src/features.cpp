#include "spanlab/features.hpp"

#include <algorithm>
#include <cctype>

namespace spanlab {

namespace {

std::string lowercase(std::string_view word) {
  std::string out(word);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_all_digits(std::string_view word) {
  return !word.empty() && std::all_of(word.begin(), word.end(),
                                      [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool has_punct(std::string_view word) {
  return std::any_of(word.begin(), word.end(), [](unsigned char c) { return std::ispunct(c) != 0; });
}

}  // namespace

FeatureSequence extract_features(const LabeledInput& input) {
  FeatureSequence out;
  const std::size_t n = input.words.size();
  out.positions.resize(n);
  const std::string label_suffix = "|L=" + std::string(input.label);

  std::vector<std::string> lower(n);
  for (std::size_t i = 0; i < n; ++i) lower[i] = lowercase(input.words[i]);

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> lexical;
    lexical.push_back("w-1=" + (i > 0 ? lower[i - 1] : std::string("<s>")));
    lexical.push_back("w0=" + lower[i]);
    lexical.push_back("w+1=" + (i + 1 < n ? lower[i + 1] : std::string("</s>")));
    const std::string& w = lower[i];
    for (std::size_t len = 1; len <= 3 && len <= w.size(); ++len) {
      lexical.push_back("pre" + std::to_string(len) + "=" + w.substr(0, len));
      lexical.push_back("suf" + std::to_string(len) + "=" + w.substr(w.size() - len));
    }
    const std::string& raw = input.words[i];
    if (!raw.empty() && std::isupper(static_cast<unsigned char>(raw.front()))) lexical.push_back("cap=1");
    if (is_all_digits(raw)) lexical.push_back("digits=1");
    if (has_punct(raw)) lexical.push_back("punct=1");

    auto& feats = out.positions[i];
    feats.reserve(2 * lexical.size() + 2);
    feats.push_back("bias");
    feats.push_back("L=" + std::string(input.label));
    for (const auto& f : lexical) feats.push_back(f);
    for (const auto& f : lexical) feats.push_back(f + label_suffix);
  }
  return out;
}

}  // namespace spanlab
