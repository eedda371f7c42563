#include "spanlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "spanlab/rng.hpp"

namespace spanlab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(const InputKey& key) { return key.doc_id + "/" + key.label; }

std::vector<std::string> Corpus::doc_ids() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& input : inputs) {
    if (seen.insert(input.document->doc_id).second) ids.push_back(input.document->doc_id);
  }
  return ids;
}

Corpus Corpus::subset(const std::vector<std::string>& ids) const {
  const std::set<std::string> keep(ids.begin(), ids.end());
  Corpus out;
  for (const auto& input : inputs) {
    if (keep.contains(input.document->doc_id)) out.inputs.push_back(input);
  }
  return out;
}

namespace {

const json& require(const json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) throw ParseError(line, std::string("missing field \"") + field + "\"");
  return *it;
}

std::string require_string(const json& obj, const char* field, std::size_t line) {
  const json& v = require(obj, field, line);
  if (!v.is_string()) throw ParseError(line, std::string("field \"") + field + "\" must be a string");
  return v.get<std::string>();
}

SpanSet parse_spans(const json& v, std::size_t line) {
  if (!v.is_array()) throw ParseError(line, "\"spans\" must be an array");
  SpanSet spans;
  for (const json& pair : v) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
        !pair[1].is_number_integer()) {
      throw ParseError(line, "each span must be a pair of integers [begin, end]");
    }
    spans.push_back({pair[0].get<int>(), pair[1].get<int>()});
  }
  std::stable_sort(spans.begin(), spans.end(),
                   [](const Span& a, const Span& b) { return a.begin < b.begin; });
  return spans;
}

json spans_to_json(const SpanSet& spans) {
  json out = json::array();
  for (const Span& s : spans) out.push_back({s.begin, s.end});
  return out;
}

template <typename OnRecord>
void for_each_json_line(std::istream& in, OnRecord&& on_record) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");
    on_record(obj, line);
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

Corpus read_corpus_unchecked(std::istream& in) {
  Corpus corpus;
  std::unordered_map<std::string, std::vector<std::shared_ptr<const Document>>> documents;

  for_each_json_line(in, [&](const json& obj, std::size_t line) {
    Document doc;
    doc.doc_id = require_string(obj, "doc_id", line);
    const json& words = require(obj, "words", line);
    if (!words.is_array()) throw ParseError(line, "\"words\" must be an array");
    for (const json& w : words) {
      if (!w.is_string()) throw ParseError(line, "every word must be a string");
      doc.words.push_back(w.get<std::string>());
    }

    InputAnnotations input;
    auto& known = documents[doc.doc_id];
    auto same = std::find_if(known.begin(), known.end(),
                             [&](const auto& d) { return d->words == doc.words; });
    if (same != known.end()) {
      input.document = *same;
    } else {
      input.document = std::make_shared<const Document>(std::move(doc));
      known.push_back(input.document);
    }
    input.label = require_string(obj, "label", line);

    const json& annotations = require(obj, "annotations", line);
    if (!annotations.is_array()) throw ParseError(line, "\"annotations\" must be an array");
    for (const json& a : annotations) {
      if (!a.is_object()) throw ParseError(line, "each annotation must be an object");
      AnnotationRecord record;
      record.annotator_id = require_string(a, "annotator_id", line);
      record.spans = parse_spans(require(a, "spans", line), line);
      input.records.push_back(std::move(record));
    }
    corpus.inputs.push_back(std::move(input));
  });
  return corpus;
}

Corpus parse_corpus(std::istream& in) {
  Corpus corpus = read_corpus_unchecked(in);
  auto violations = validate(corpus, ValidationPolicy::Lenient);
  if (!violations.empty()) throw ValidationError(violations.front());
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  auto in = open_input(path);
  return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& input : corpus.inputs) {
    ordered_json obj;
    obj["doc_id"] = input.document->doc_id;
    obj["words"] = input.document->words;
    obj["label"] = input.label;
    ordered_json annotations = ordered_json::array();
    for (const auto& record : input.records) {
      ordered_json a;
      a["annotator_id"] = record.annotator_id;
      a["spans"] = spans_to_json(record.spans);
      annotations.push_back(std::move(a));
    }
    obj["annotations"] = std::move(annotations);
    out << obj.dump() << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  auto out = open_output(path);
  write_corpus(corpus, out);
}

std::vector<std::string> validate(const Corpus& corpus, ValidationPolicy policy) {
  std::vector<std::string> violations;
  std::set<InputKey> seen_inputs;
  std::unordered_map<std::string, const Document*> first_document;

  for (const auto& input : corpus.inputs) {
    const Document& doc = *input.document;
    const InputKey key = input.key();
    const std::string where = to_string(key);

    if (!seen_inputs.insert(key).second) violations.push_back("duplicate input " + where);

    auto [it, inserted] = first_document.emplace(doc.doc_id, &doc);
    if (!inserted && it->second->words != doc.words) {
      violations.push_back("document " + doc.doc_id + " appears with different words");
    }
    if (doc.words.empty()) violations.push_back(where + ": document has no words");
    for (const auto& w : doc.words) {
      if (w.find('\n') != std::string::npos) {
        violations.push_back(where + ": word contains a newline");
        break;
      }
    }
    if (input.records.empty()) violations.push_back(where + ": no annotation records");

    std::set<std::string> annotators;
    const int n = doc.size();
    for (const auto& record : input.records) {
      const std::string at = where + "/" + record.annotator_id + ": ";
      if (!annotators.insert(record.annotator_id).second) {
        violations.push_back(at + "duplicate annotator_id");
      }
      for (std::size_t k = 0; k < record.spans.size(); ++k) {
        const Span& s = record.spans[k];
        if (s.begin < 1) {
          violations.push_back(at + "span begin " + std::to_string(s.begin) + " is below 1");
        } else if (s.begin > s.end) {
          violations.push_back(at + "span " + to_string(s) + " ends before it begins");
        } else if (s.end > n) {
          violations.push_back(at + "span end " + std::to_string(s.end) + " exceeds N=" +
                               std::to_string(n));
        }
        if (k > 0 && record.spans[k - 1].end >= s.begin) {
          violations.push_back(at + "overlap between spans " + to_string(record.spans[k - 1]) +
                               " and " + to_string(s));
        }
        if (policy == ValidationPolicy::AnnotatorInput && s.begin <= s.end &&
            s.length() < kMinAnnotatorSpanWords) {
          violations.push_back(at + "span shorter than 3 words: " + to_string(s));
        }
      }
    }
  }
  return violations;
}

Predictions parse_predictions(std::istream& in) {
  Predictions predictions;
  for_each_json_line(in, [&](const json& obj, std::size_t line) {
    InputKey key{require_string(obj, "doc_id", line), require_string(obj, "label", line)};
    SpanSet spans = parse_spans(require(obj, "spans", line), line);
    for (std::size_t k = 0; k < spans.size(); ++k) {
      if (spans[k].begin < 1 || spans[k].begin > spans[k].end) {
        throw ParseError(line, "invalid span " + to_string(spans[k]));
      }
      if (k > 0 && spans[k - 1].end >= spans[k].begin) {
        throw ParseError(line, "overlapping spans in prediction for " + to_string(key));
      }
    }
    if (!predictions.emplace(key, std::move(spans)).second) {
      throw ParseError(line, "duplicate prediction for " + to_string(key));
    }
  });
  return predictions;
}

Predictions load_predictions(const std::string& path) {
  auto in = open_input(path);
  return parse_predictions(in);
}

void write_predictions(const Predictions& predictions, const std::vector<InputKey>& order,
                       std::ostream& out) {
  for (const auto& key : order) {
    auto it = predictions.find(key);
    if (it == predictions.end()) throw std::invalid_argument("no prediction for " + to_string(key));
    ordered_json obj;
    obj["doc_id"] = key.doc_id;
    obj["label"] = key.label;
    obj["spans"] = spans_to_json(it->second);
    out << obj.dump() << '\n';
  }
}

void write_predictions(const Predictions& predictions, std::ostream& out) {
  std::vector<InputKey> order;
  for (const auto& [key, spans] : predictions) order.push_back(key);
  write_predictions(predictions, order, out);
}

FoldPlan split_folds(const Corpus& corpus, int k, double dev_fraction, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("fold count must be positive");
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw std::invalid_argument("dev fraction must lie in (0, 1)");
  }
  std::vector<std::string> ids = corpus.doc_ids();
  if (static_cast<std::size_t>(k) > ids.size()) {
    throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds the " +
                                std::to_string(ids.size()) + " distinct documents");
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(ids));

  FoldPlan plan{k, dev_fraction, seed, {}};
  const std::size_t base = ids.size() / static_cast<std::size_t>(k);
  const std::size_t extra = ids.size() % static_cast<std::size_t>(k);
  std::size_t offset = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    Fold fold;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i >= offset && i < offset + size) {
        fold.test.push_back(ids[i]);
      } else {
        rest.push_back(ids[i]);
      }
    }
    offset += size;

    const auto dev_count = static_cast<std::size_t>(
        std::lround(dev_fraction * static_cast<double>(rest.size())));
    std::vector<std::size_t> order(rest.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng fold_rng(mix_seed(seed, static_cast<std::uint64_t>(f)));
    fold_rng.shuffle(std::span<std::size_t>(order));
    std::vector<bool> is_dev(rest.size(), false);
    for (std::size_t i = 0; i < dev_count; ++i) is_dev[order[i]] = true;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      (is_dev[i] ? fold.dev : fold.train).push_back(rest[i]);
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

void write_fold_plan(const FoldPlan& plan, std::ostream& out) {
  ordered_json obj;
  obj["k"] = plan.k;
  obj["dev_fraction"] = plan.dev_fraction;
  obj["seed"] = plan.seed;
  ordered_json folds = ordered_json::array();
  for (const Fold& fold : plan.folds) {
    ordered_json f;
    f["train"] = fold.train;
    f["dev"] = fold.dev;
    f["test"] = fold.test;
    folds.push_back(std::move(f));
  }
  obj["folds"] = std::move(folds);
  out << obj.dump(2) << '\n';
}

namespace {

std::string_view conll_tag(Tag5 t) {
  switch (t) {
    case Tag5::Singleton: return "S-SPAN";
    case Tag5::Begin: return "B-SPAN";
    case Tag5::End: return "E-SPAN";
    case Tag5::Inside: return "I-SPAN";
    case Tag5::Outside: return "O";
  }
  return "O";
}

}  // namespace

void export_conll(const std::vector<ConllSequence>& sequences, std::ostream& out) {
  for (const auto& seq : sequences) {
    if (seq.gold.size() != seq.words.size() || seq.pred.size() != seq.words.size()) {
      throw std::invalid_argument("tag sequence length does not match document length");
    }
  }
  for (const auto& seq : sequences) {
    for (std::size_t i = 0; i < seq.words.size(); ++i) {
      out << seq.words[i] << ' ' << conll_tag(seq.gold[i]) << ' ' << conll_tag(seq.pred[i]) << '\n';
    }
    out << '\n';
  }
}

}  // namespace spanlab
