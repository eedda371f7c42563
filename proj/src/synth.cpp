#include "spanlab/synth.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <stdexcept>

namespace spanlab {

void check_config(const SynthConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("synth config: " + what); };
  if (c.n_docs < 1 || c.vocab_size < 1 || c.annotators_per_input < 1) fail("counts must be positive");
  if (c.doc_length_min < 1 || c.doc_length_max < c.doc_length_min) fail("bad document length range");
  if (c.labels.empty()) fail("label set is empty");
  if (!(c.labels_per_doc >= 1.0) || c.labels_per_doc > static_cast<double>(c.labels.size())) {
    fail("labels_per_doc must lie in [1, number of labels]");
  }
  if (c.spans_per_input_min < 1 || c.spans_per_input_max < c.spans_per_input_min) fail("bad spans per input range");
  if (c.span_length_min < 3) fail("span_length_min must be at least 3");
  if (c.span_length_max < c.span_length_min) fail("bad span length range");
  if (c.trigger_rate < 0.0 || c.trigger_rate > 1.0) fail("trigger_rate must lie in [0, 1]");
  if (c.triggers_per_label < 1) fail("triggers_per_label must be positive");
  const int worst = c.spans_per_input_max * c.span_length_max + (c.spans_per_input_max - 1);
  if (worst > c.doc_length_min) {
    fail("infeasible: " + std::to_string(c.spans_per_input_max) + " spans of up to " +
         std::to_string(c.span_length_max) + " words do not fit in " + std::to_string(c.doc_length_min) +
         " words");
  }
}

void check_noise(const NoiseModel& n) {
  for (double p : {n.p_drop, n.jitter_prob, n.label_disagreement}) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("noise model: probabilities must lie in [0, 1]");
  }
  if (n.jitter < 0 || n.p_spurious < 0.0) throw std::invalid_argument("noise model: negative jitter or rate");
}

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string doc_id_for(int d, int n_docs) {
  std::string digits = std::to_string(d + 1);
  const std::size_t width = std::to_string(n_docs).size();
  return "doc" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

/// m spans with the given lengths, separated by at least one word, placed
/// uniformly at random in n words.
SpanSet place_spans(const std::vector<int>& lengths, int n, Rng& rng) {
  const int m = static_cast<int>(lengths.size());
  const int total = std::accumulate(lengths.begin(), lengths.end(), 0) + (m - 1);
  const int slack = n - total;
  std::vector<int> offsets(static_cast<std::size_t>(m));
  for (int& o : offsets) o = static_cast<int>(rng.uniform_int(0, slack));
  std::sort(offsets.begin(), offsets.end());
  SpanSet spans;
  int cursor = 1;
  for (int k = 0; k < m; ++k) {
    const int begin = cursor + offsets[static_cast<std::size_t>(k)];
    spans.push_back({begin, begin + lengths[static_cast<std::size_t>(k)] - 1});
    cursor += lengths[static_cast<std::size_t>(k)] + 1;
  }
  return spans;
}

/// Sorts, then merges spans that overlap or touch.
SpanSet merge_touching(SpanSet spans) {
  std::sort(spans.begin(), spans.end());
  SpanSet out;
  for (const Span& s : spans) {
    if (!out.empty() && s.begin <= out.back().end + 1) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

bool collides(const SpanSet& spans, const Span& candidate) {
  return std::any_of(spans.begin(), spans.end(), [&](const Span& s) {
    return candidate.begin <= s.end + 1 && s.begin <= candidate.end + 1;
  });
}

Span clip_to_min_length(Span s, int n, int min_length) {
  s.begin = std::clamp(s.begin, 1, n);
  s.end = std::clamp(s.end, 1, n);
  if (s.end - s.begin + 1 < min_length) {
    s.end = s.begin + min_length - 1;
    if (s.end > n) {
      s.end = n;
      s.begin = n - min_length + 1;
    }
  }
  return s;
}

SpanSet annotate(const SpanSet& truth, int n, const NoiseModel& noise, int span_length_min,
                 int span_length_max, Rng& rng) {
  SpanSet spans;
  for (const Span& t : truth) {
    if (rng.bernoulli(noise.p_drop)) continue;
    Span s = t;
    for (int* boundary : {&s.begin, &s.end}) {
      if (noise.jitter > 0 && rng.bernoulli(noise.jitter_prob)) {
        const int shift = static_cast<int>(rng.uniform_int(1, noise.jitter));
        *boundary += rng.bernoulli(0.5) ? shift : -shift;
      }
    }
    spans.push_back(clip_to_min_length(s, n, span_length_min));
  }
  spans = merge_touching(std::move(spans));

  const int spurious = rng.poisson(noise.p_spurious);
  for (int k = 0; k < spurious; ++k) {
    const int length = std::min(n, static_cast<int>(rng.uniform_int(span_length_min, span_length_max)));
    const int begin = static_cast<int>(rng.uniform_int(1, n - length + 1));
    const Span candidate{begin, begin + length - 1};
    if (collides(spans, candidate)) continue;
    spans.insert(std::upper_bound(spans.begin(), spans.end(), candidate), candidate);
  }
  return spans;
}

}  // namespace

SynthTruth generate_truth(const SynthConfig& config, Rng& rng) {
  check_config(config);
  SynthTruth truth;
  const int num_labels = static_cast<int>(config.labels.size());
  for (int d = 0; d < config.n_docs; ++d) {
    const int n = static_cast<int>(rng.uniform_int(config.doc_length_min, config.doc_length_max));
    Document doc{doc_id_for(d, config.n_docs), {}};
    for (int i = 0; i < n; ++i) doc.words.push_back("w" + std::to_string(rng.uniform_int(0, config.vocab_size - 1)));

    const int count = std::clamp(1 + rng.poisson(config.labels_per_doc - 1.0), 1, num_labels);
    std::vector<int> label_ids(static_cast<std::size_t>(num_labels));
    std::iota(label_ids.begin(), label_ids.end(), 0);
    rng.shuffle(std::span<int>(label_ids));
    label_ids.resize(static_cast<std::size_t>(count));
    std::sort(label_ids.begin(), label_ids.end());

    std::vector<SpanSet> label_spans;
    for (int l : label_ids) {
      (void)l;
      const int m = static_cast<int>(rng.uniform_int(config.spans_per_input_min, config.spans_per_input_max));
      std::vector<int> lengths(static_cast<std::size_t>(m));
      for (int& len : lengths) len = static_cast<int>(rng.uniform_int(config.span_length_min, config.span_length_max));
      label_spans.push_back(place_spans(lengths, n, rng));
    }
    for (std::size_t k = 0; k < label_ids.size(); ++k) {
      const std::string prefix = lowercase(config.labels[static_cast<std::size_t>(label_ids[k])]) + "_t";
      for (const Span& s : label_spans[k]) {
        for (int i = s.begin; i <= s.end; ++i) {
          if (rng.bernoulli(config.trigger_rate)) {
            doc.words[static_cast<std::size_t>(i - 1)] =
                prefix + std::to_string(rng.uniform_int(0, config.triggers_per_label - 1));
          }
        }
      }
    }

    auto shared = std::make_shared<const Document>(std::move(doc));
    for (std::size_t k = 0; k < label_ids.size(); ++k) {
      truth.push_back({shared, config.labels[static_cast<std::size_t>(label_ids[k])], label_spans[k]});
    }
  }
  return truth;
}

Corpus simulate_annotators(const SynthTruth& truth, const NoiseModel& noise, int annotators_per_input,
                           int span_length_min, int span_length_max, Rng& rng) {
  check_noise(noise);
  if (annotators_per_input < 1) throw std::invalid_argument("need at least one annotator per input");
  Corpus corpus;
  for (const TruthInput& t : truth) {
    const int n = t.document->size();
    InputAnnotations input{t.document, t.label, {}};
    std::vector<AnnotationRecord> all;
    std::vector<bool> skipped;
    for (int a = 1; a <= annotators_per_input; ++a) {
      skipped.push_back(rng.bernoulli(noise.label_disagreement));
      all.push_back({"a" + std::to_string(a), annotate(t.spans, n, noise, span_length_min, span_length_max, rng)});
    }
    if (std::all_of(skipped.begin(), skipped.end(), [](bool s) { return s; })) skipped.front() = false;
    for (std::size_t a = 0; a < all.size(); ++a) {
      if (!skipped[a]) input.records.push_back(std::move(all[a]));
    }
    corpus.inputs.push_back(std::move(input));
  }
  return corpus;
}

SynthOutput synthesize(const SynthConfig& config, const NoiseModel& noise) {
  check_noise(noise);
  Rng truth_rng(mix_seed(config.seed, 0));
  Rng noise_rng(mix_seed(config.seed, 1));
  SynthOutput out;
  out.truth = generate_truth(config, truth_rng);
  out.corpus = simulate_annotators(out.truth, noise, config.annotators_per_input, config.span_length_min,
                                   config.span_length_max, noise_rng);
  return out;
}

Predictions truth_predictions(const SynthTruth& truth) {
  Predictions out;
  for (const auto& t : truth) out.emplace(t.key(), t.spans);
  return out;
}

std::vector<InputKey> truth_order(const SynthTruth& truth) {
  std::vector<InputKey> order;
  for (const auto& t : truth) order.push_back(t.key());
  return order;
}

void read_synth_config(KeyValueConfig& kv, SynthConfig& c, NoiseModel& noise) {
  c.n_docs = static_cast<int>(kv.get_int("n_docs", c.n_docs));
  c.vocab_size = static_cast<int>(kv.get_int("vocab_size", c.vocab_size));
  c.doc_length_min = static_cast<int>(kv.get_int("doc_length_min", c.doc_length_min));
  c.doc_length_max = static_cast<int>(kv.get_int("doc_length_max", c.doc_length_max));
  c.labels = kv.get_list("labels", c.labels);
  c.labels_per_doc = kv.get_double("labels_per_doc", c.labels_per_doc);
  c.spans_per_input_min = static_cast<int>(kv.get_int("spans_per_input_min", c.spans_per_input_min));
  c.spans_per_input_max = static_cast<int>(kv.get_int("spans_per_input_max", c.spans_per_input_max));
  c.span_length_min = static_cast<int>(kv.get_int("span_length_min", c.span_length_min));
  c.span_length_max = static_cast<int>(kv.get_int("span_length_max", c.span_length_max));
  c.annotators_per_input = static_cast<int>(kv.get_int("annotators_per_input", c.annotators_per_input));
  c.trigger_rate = kv.get_double("trigger_rate", c.trigger_rate);
  c.triggers_per_label = static_cast<int>(kv.get_int("triggers_per_label", c.triggers_per_label));
  c.seed = kv.get_uint("seed", c.seed);
  noise.p_drop = kv.get_double("p_drop", noise.p_drop);
  noise.jitter = static_cast<int>(kv.get_int("jitter", noise.jitter));
  noise.jitter_prob = kv.get_double("jitter_prob", noise.jitter_prob);
  noise.p_spurious = kv.get_double("p_spurious", noise.p_spurious);
  noise.label_disagreement = kv.get_double("label_disagreement", noise.label_disagreement);
  kv.finish();
  check_config(c);
  check_noise(noise);
}

}  // namespace spanlab
