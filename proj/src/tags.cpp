#include "spanlab/tags.hpp"

#include <stdexcept>
#include <string>

namespace spanlab {

std::string_view tag_name(Tag5 t) {
  switch (t) {
    case Tag5::Singleton: return "S";
    case Tag5::Begin: return "B";
    case Tag5::End: return "E";
    case Tag5::Inside: return "I";
    case Tag5::Outside: return "O";
  }
  return "?";
}

std::string_view tag_name(Tag3 t) {
  switch (t) {
    case Tag3::Start: return "ST";
    case Tag3::Continue: return "CO";
    case Tag3::Outside: return "O";
  }
  return "?";
}

namespace {

TransitionMask build_mask() {
  using enum Tag5;
  TransitionMask mask;
  auto allow = [&](Tag5 from, std::initializer_list<Tag5> to) {
    for (Tag5 t : to) mask.allowed[index(from)][index(t)] = true;
  };
  // Closed state: may stay outside or start a span.
  for (Tag5 closed : {Singleton, End, Outside}) allow(closed, {Singleton, Begin, Outside});
  // Open state: must continue or close.
  for (Tag5 open : {Begin, Inside}) allow(open, {Inside, End});

  for (Tag5 t : {Singleton, Begin, Outside}) mask.start[index(t)] = true;
  for (Tag5 t : {Singleton, End, Outside}) mask.end[index(t)] = true;
  return mask;
}

}  // namespace

const TransitionMask& transition_mask() {
  static const TransitionMask mask = build_mask();
  return mask;
}

bool is_admissible(const TagSequence& tags) {
  if (tags.empty()) return true;
  const TransitionMask& mask = transition_mask();
  if (!mask.start[index(tags.front())] || !mask.end[index(tags.back())]) return false;
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (!mask(tags[i - 1], tags[i])) return false;
  }
  return true;
}

TagSequence encode_spans(const SpanSet& spans, int n) {
  TagSequence tags(static_cast<std::size_t>(n), Tag5::Outside);
  int previous_end = 0;
  for (const Span& s : spans) {
    if (s.begin < 1 || s.end > n || s.begin > s.end) {
      throw std::out_of_range("span " + to_string(s) + " out of bounds for n=" +
                              std::to_string(n));
    }
    if (s.begin <= previous_end) {
      throw std::invalid_argument("span " + to_string(s) + " overlaps or is out of order");
    }
    previous_end = s.end;
    auto at = [&](int i) -> Tag5& { return tags[static_cast<std::size_t>(i - 1)]; };
    if (s.begin == s.end) {
      at(s.begin) = Tag5::Singleton;
      continue;
    }
    at(s.begin) = Tag5::Begin;
    for (int i = s.begin + 1; i < s.end; ++i) at(i) = Tag5::Inside;
    at(s.end) = Tag5::End;
  }
  return tags;
}

SpanSet decode_tags(const TagSequence& tags) {
  SpanSet spans;
  int open = 0;  // begin of the open span, 0 when none
  int i = 0;
  auto close_before = [&] {
    if (open != 0) spans.push_back({open, i - 1});
    open = 0;
  };
  for (Tag5 t : tags) {
    ++i;
    switch (t) {
      case Tag5::Singleton:
        close_before();
        spans.push_back({i, i});
        break;
      case Tag5::Begin:
        close_before();
        open = i;
        break;
      case Tag5::Inside:
        if (open == 0) open = i;
        break;
      case Tag5::End:
        spans.push_back({open == 0 ? i : open, i});
        open = 0;
        break;
      case Tag5::Outside:
        close_before();
        break;
    }
  }
  ++i;
  close_before();
  return spans;
}

SpanSet decode_start_continue(const std::vector<Tag3>& tags) {
  SpanSet spans;
  int open = 0;
  int i = 0;
  auto close_before = [&] {
    if (open != 0) spans.push_back({open, i - 1});
    open = 0;
  };
  for (Tag3 t : tags) {
    ++i;
    switch (t) {
      case Tag3::Start:
        close_before();
        open = i;
        break;
      case Tag3::Continue:
        if (open == 0) open = i;
        break;
      case Tag3::Outside:
        close_before();
        break;
    }
  }
  ++i;
  close_before();
  return spans;
}

}  // namespace spanlab
