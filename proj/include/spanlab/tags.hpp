#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "spanlab/span.hpp"

namespace spanlab {

/// Five-way position-in-span tag. The enumerator order is the tie-break
/// order used by Viterbi decoding.
enum class Tag5 : int { Singleton = 0, Begin = 1, End = 2, Inside = 3, Outside = 4 };

inline constexpr int kNumTags = 5;
inline constexpr std::array<Tag5, kNumTags> kAllTags = {Tag5::Singleton, Tag5::Begin, Tag5::End,
                                                        Tag5::Inside, Tag5::Outside};

using TagSequence = std::vector<Tag5>;

/// Start / continue / outside tags drawn by the random baseline.
enum class Tag3 : int { Start = 0, Continue = 1, Outside = 2 };

constexpr int index(Tag5 t) { return static_cast<int>(t); }

std::string_view tag_name(Tag5 t);  // "S","B","E","I","O"
std::string_view tag_name(Tag3 t);  // "ST","CO","O"

/// Which tag bigrams, first tags and last tags can occur in the encoding of
/// a valid span set.
struct TransitionMask {
  std::array<std::array<bool, kNumTags>, kNumTags> allowed{};
  std::array<bool, kNumTags> start{};
  std::array<bool, kNumTags> end{};

  bool operator()(Tag5 from, Tag5 to) const { return allowed[index(from)][index(to)]; }
};

const TransitionMask& transition_mask();

bool is_admissible(const TagSequence& tags);

/// Throws std::out_of_range if the spans do not fit in n words.
TagSequence encode_spans(const SpanSet& spans, int n);

/// Accepts any tag sequence. Inside/End with no open span act as
/// Begin/Singleton; an open span is closed before Outside/Begin/Singleton
/// and at the end of the sequence.
SpanSet decode_tags(const TagSequence& tags);

/// A word lies in some output span iff its tag is not Outside. Start always
/// opens a new span; Continue opens one only when none is open.
SpanSet decode_start_continue(const std::vector<Tag3>& tags);

}  // namespace spanlab
