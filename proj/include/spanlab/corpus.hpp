#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spanlab/span.hpp"
#include "spanlab/tags.hpp"

namespace spanlab {

struct Document {
  std::string doc_id;
  std::vector<std::string> words;

  int size() const { return static_cast<int>(words.size()); }
  friend bool operator==(const Document&, const Document&) = default;
};

struct AnnotationRecord {
  std::string annotator_id;
  SpanSet spans;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Identifies one (description, area-of-law) input.
struct InputKey {
  std::string doc_id;
  std::string label;

  friend auto operator<=>(const InputKey&, const InputKey&) = default;
};

std::string to_string(const InputKey& key);

/// A document paired with a label and every annotator's spans for it.
/// Documents are immutable and shared between the inputs that use them.
struct InputAnnotations {
  std::shared_ptr<const Document> document;
  std::string label;
  std::vector<AnnotationRecord> records;

  InputKey key() const { return {document->doc_id, label}; }
  int length() const { return document->size(); }
  const std::vector<std::string>& words() const { return document->words; }

  friend bool operator==(const InputAnnotations& a, const InputAnnotations& b) {
    return *a.document == *b.document && a.label == b.label && a.records == b.records;
  }
};

struct Corpus {
  std::vector<InputAnnotations> inputs;

  /// Distinct doc_ids in order of first appearance.
  std::vector<std::string> doc_ids() const;

  /// Inputs whose doc_id is in `ids`, input order preserved.
  Corpus subset(const std::vector<std::string>& ids) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Malformed input text; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that breaks a corpus invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValidationPolicy { AnnotatorInput, Lenient };

/// Reads corpus JSONL without checking span invariants (spans are sorted by
/// begin, nothing else). Used where every violation must be listed.
Corpus read_corpus_unchecked(std::istream& in);

/// Reads corpus JSONL and throws ValidationError on the first structural
/// violation (bounds, overlap, duplicates).
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::string& path);

void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::string& path);

/// Human-readable violations; empty means valid. `Lenient` reports only
/// structural problems, `AnnotatorInput` also flags spans under 3 words.
std::vector<std::string> validate(const Corpus& corpus, ValidationPolicy policy);

inline constexpr int kMinAnnotatorSpanWords = 3;

// Predictions

using Predictions = std::map<InputKey, SpanSet>;

Predictions parse_predictions(std::istream& in);
Predictions load_predictions(const std::string& path);

/// Writes predictions in `order` (typically corpus input order).
void write_predictions(const Predictions& predictions, const std::vector<InputKey>& order,
                       std::ostream& out);
void write_predictions(const Predictions& predictions, std::ostream& out);

// Folds

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

struct FoldPlan {
  int k = 0;
  double dev_fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
};

inline constexpr int kDefaultFolds = 20;
inline constexpr double kDefaultDevFraction = 0.1;

/// Document-level k-fold split. All inputs sharing a doc_id land in the
/// same fold. Pure function of (corpus order, k, dev_fraction, seed).
FoldPlan split_folds(const Corpus& corpus, int k, double dev_fraction, std::uint64_t seed);

void write_fold_plan(const FoldPlan& plan, std::ostream& out);

// CoNLL export

struct ConllSequence {
  std::span<const std::string> words;
  TagSequence gold;
  TagSequence pred;
};

/// "word gold pred" per line, tags O/B-SPAN/I-SPAN/E-SPAN/S-SPAN, one blank
/// line after every sequence.
void export_conll(const std::vector<ConllSequence>& sequences, std::ostream& out);

}  // namespace spanlab
