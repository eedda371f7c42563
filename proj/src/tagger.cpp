#include "spanlab/tagger.hpp"

#include <fstream>
#include <numeric>

#include "json.hpp"
#include "spanlab/aggregate.hpp"
#include "spanlab/evaluate.hpp"

namespace spanlab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(TrainingMode mode) { return mode == TrainingMode::MV ? "mv" : "rel"; }

TrainingMode parse_training_mode(std::string_view text) {
  if (text == "mv") return TrainingMode::MV;
  if (text == "rel") return TrainingMode::ReL;
  throw std::invalid_argument("unknown training mode \"" + std::string(text) + "\"");
}

std::vector<Hyperparams> default_grid() {
  std::vector<Hyperparams> grid;
  for (double lr : {0.01, 0.05, 0.1, 0.5}) {
    for (int batch : {1, 8, 32}) {
      Hyperparams hp;
      hp.learning_rate = lr;
      hp.batch_size = batch;
      grid.push_back(hp);
    }
  }
  return grid;
}

void CrfModel::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < feature_names.size(); ++i) index_.emplace(feature_names[i], static_cast<int>(i));
}

int CrfModel::feature_id(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int CrfModel::add_feature(const std::string& name) {
  auto [it, inserted] = index_.emplace(name, num_features());
  if (inserted) feature_names.push_back(name);
  return it->second;
}

void CrfModel::resize_weights() {
  const Eigen::Index old_rows = feature_weights.rows();
  feature_weights.conservativeResize(num_features(), kNumTags);
  feature_weights.bottomRows(num_features() - old_rows).setZero();
}

IndexedFeatures index_features(const CrfModel& model, const FeatureSequence& feats) {
  if (feats.template_version != model.template_version) {
    throw TemplateMismatch("feature template " + feats.template_version +
                           " does not match model template " + model.template_version);
  }
  IndexedFeatures out(feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) {
    for (const auto& name : feats.positions[i]) {
      const int id = model.feature_id(name);
      if (id >= 0) out[i].push_back(id);
    }
  }
  return out;
}

namespace {

Potentials<double> potentials_from(const WeightMatrix& weights, double scale, const CrfModel& model,
                                   const IndexedFeatures& feats) {
  Potentials<double> p;
  p.emissions = EmissionMatrix<double>::Zero(static_cast<Eigen::Index>(feats.size()), kNumTags);
  for (std::size_t i = 0; i < feats.size(); ++i) {
    TagVector<double> row = TagVector<double>::Zero();
    for (int f : feats[i]) row += weights.row(f);
    p.emissions.row(static_cast<Eigen::Index>(i)) = scale * row;
  }
  p.transitions = model.transitions;
  p.start = model.start;
  p.end = model.end;
  return p;
}

TagVector<double> one_hot(Tag5 t) {
  TagVector<double> v = TagVector<double>::Zero();
  v(index(t)) = 1.0;
  return v;
}

/// Gradient accumulator that remembers which feature rows it touched.
struct GradientSink {
  WeightMatrix features;
  std::vector<int> touched;
  std::vector<char> is_touched;
  TransitionMatrix<double> transitions = TransitionMatrix<double>::Zero();
  TagVector<double> start = TagVector<double>::Zero();
  TagVector<double> end = TagVector<double>::Zero();

  explicit GradientSink(int num_features)
      : features(WeightMatrix::Zero(num_features, kNumTags)),
        is_touched(static_cast<std::size_t>(num_features), 0) {}

  void add_feature_row(int f, const TagVector<double>& delta) {
    if (!is_touched[static_cast<std::size_t>(f)]) {
      is_touched[static_cast<std::size_t>(f)] = 1;
      touched.push_back(f);
    }
    features.row(f) += delta;
  }

  void clear() {
    for (int f : touched) {
      features.row(f).setZero();
      is_touched[static_cast<std::size_t>(f)] = 0;
    }
    touched.clear();
    transitions.setZero();
    start.setZero();
    end.setZero();
  }
};

/// Adds expected minus observed counts for one example; returns its nll.
double accumulate(const Potentials<double>& potentials, bool constrained,
                  const TrainingExample& example, GradientSink& sink) {
  const ForwardBackward<double> fb = forward_backward(potentials, constrained);
  const double nll = fb.log_z - sequence_score(potentials, example.tags);
  const auto n = static_cast<std::size_t>(potentials.length());
  for (std::size_t i = 0; i < n; ++i) {
    const TagVector<double> delta = fb.marginals.row(static_cast<Eigen::Index>(i)) - one_hot(example.tags[i]);
    for (int f : example.features[i]) sink.add_feature_row(f, delta);
    if (i > 0) sink.transitions(index(example.tags[i - 1]), index(example.tags[i])) -= 1.0;
  }
  sink.transitions += fb.transition_marginals;
  sink.start += fb.marginals.row(0) - one_hot(example.tags.front());
  sink.end += fb.marginals.row(static_cast<Eigen::Index>(n - 1)) - one_hot(example.tags.back());
  return nll;
}

double squared_norm(const CrfModel& model, const WeightMatrix& weights, double scale) {
  return scale * scale * weights.squaredNorm() + model.transitions.squaredNorm() +
         model.start.squaredNorm() + model.end.squaredNorm();
}

void check_example(const TrainingExample& example) {
  if (example.tags.empty() || example.tags.size() != example.features.size()) {
    throw std::invalid_argument("training example tags must match its length (N >= 1)");
  }
}

}  // namespace

Potentials<double> log_potentials(const CrfModel& model, const IndexedFeatures& feats) {
  return potentials_from(model.feature_weights, 1.0, model, feats);
}

Potentials<double> log_potentials(const CrfModel& model, const FeatureSequence& feats) {
  return log_potentials(model, index_features(model, feats));
}

LossAndGradient loss_and_gradient(const CrfModel& model, const TrainingExample& example, double l2) {
  check_example(example);
  GradientSink sink(model.num_features());
  const double nll = accumulate(log_potentials(model, example.features), model.constrained, example, sink);

  LossAndGradient out;
  out.nll = nll + 0.5 * l2 * squared_norm(model, model.feature_weights, 1.0);
  out.gradient.feature_weights = sink.features + l2 * model.feature_weights;
  out.gradient.transitions = sink.transitions + l2 * model.transitions;
  out.gradient.start = sink.start + l2 * model.start;
  out.gradient.end = sink.end + l2 * model.end;
  return out;
}

std::vector<TrainingExample> build_examples(const Corpus& corpus, TrainingMode mode, CrfModel& model) {
  std::vector<FeatureSequence> features;
  features.reserve(corpus.inputs.size());
  for (const auto& input : corpus.inputs) {
    features.push_back(extract_features(labeled_input(input)));
    for (const auto& position : features.back().positions) {
      for (const auto& name : position) model.add_feature(name);
    }
  }
  model.resize_weights();

  std::vector<TrainingExample> examples;
  for (std::size_t k = 0; k < corpus.inputs.size(); ++k) {
    const auto& input = corpus.inputs[k];
    IndexedFeatures indexed = index_features(model, features[k]);
    if (mode == TrainingMode::MV) {
      examples.push_back({std::move(indexed), encode_spans(majority_vote(input), input.length())});
    } else {
      for (const auto& record : input.records) {
        examples.push_back({indexed, encode_spans(record.spans, input.length())});
      }
    }
  }
  return examples;
}

CrfModel train(const Corpus& corpus, TrainingMode mode, const Hyperparams& hp, std::uint64_t seed,
               bool constrained, TrainingTrace* trace) {
  if (corpus.inputs.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  if (!(hp.learning_rate > 0.0) || hp.batch_size < 1 || hp.epochs < 1 || hp.l2 < 0.0) {
    throw std::invalid_argument("invalid hyperparameters");
  }
  CrfModel model;
  model.constrained = constrained;
  model.feature_weights = WeightMatrix::Zero(0, kNumTags);
  const std::vector<TrainingExample> examples = build_examples(corpus, mode, model);
  for (const auto& example : examples) check_example(example);

  // Feature weights are stored as scale * weights so the per-step L2 decay
  // costs O(1) instead of touching every row.
  WeightMatrix weights = model.feature_weights;
  double scale = 1.0;
  const double decay = 1.0 - hp.learning_rate * hp.l2;

  GradientSink sink(model.num_features());
  Rng rng(seed);
  std::vector<std::size_t> order(examples.size());
  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(hp.batch_size)) {
      const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(hp.batch_size));
      sink.clear();
      for (std::size_t k = first; k < last; ++k) {
        const TrainingExample& example = examples[order[k]];
        accumulate(potentials_from(weights, scale, model, example.features), constrained, example, sink);
      }
      const double step = hp.learning_rate / static_cast<double>(last - first);
      scale *= decay;
      for (int f : sink.touched) weights.row(f) -= (step / scale) * sink.features.row(f);
      model.transitions = decay * model.transitions - step * sink.transitions;
      model.start = decay * model.start - step * sink.start;
      model.end = decay * model.end - step * sink.end;
      if (scale < 1e-6) {
        weights *= scale;
        scale = 1.0;
      }
    }
    if (trace != nullptr) {
      double total = 0.0;
      for (const auto& example : examples) {
        const Potentials<double> p = potentials_from(weights, scale, model, example.features);
        total += forward_log_z(p, constrained) - sequence_score(p, example.tags);
      }
      trace->epoch_objective.push_back(total / static_cast<double>(examples.size()) +
                                        0.5 * hp.l2 * squared_norm(model, weights, scale));
    }
  }
  model.feature_weights = scale * weights;
  return model;
}

SpanSet predict(const CrfModel& model, const LabeledInput& input) {
  if (input.words.empty()) return {};
  const Potentials<double> p = log_potentials(model, extract_features(input));
  return decode_tags(viterbi(p, model.constrained));
}

Predictions predict_corpus(const CrfModel& model, const Corpus& corpus) {
  Predictions out;
  for (const auto& input : corpus.inputs) out.emplace(input.key(), predict(model, labeled_input(input)));
  return out;
}

TuneResult tune(const Corpus& train_split, const Corpus& dev_split, const std::vector<Hyperparams>& grid,
                TrainingMode mode, std::uint64_t seed, bool constrained) {
  if (grid.empty()) throw std::invalid_argument("tuning grid is empty");
  TuneResult result{grid.front(), {}};
  if (grid.size() == 1) return result;
  double best_f1 = -1.0;
  for (const Hyperparams& hp : grid) {
    const CrfModel model = train(train_split, mode, hp, seed, constrained);
    const double f1 = evaluate_corpus(predict_corpus(model, dev_split), dev_split, EvalLevel::Word).scores.f1;
    result.dev_word_f1.push_back(f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      result.best = hp;
    }
  }
  return result;
}

SpanSet random_tagger(int n, Rng& rng) {
  std::vector<Tag3> tags(static_cast<std::size_t>(std::max(n, 0)));
  for (Tag3& t : tags) t = static_cast<Tag3>(rng.uniform_int(0, 2));
  return decode_start_continue(tags);
}

Predictions random_predictions(const Corpus& corpus, Rng& rng) {
  Predictions out;
  for (const auto& input : corpus.inputs) out.emplace(input.key(), random_tagger(input.length(), rng));
  return out;
}

namespace {

constexpr std::string_view kModelFormat = "spanlab-crf";
constexpr int kModelFormatVersion = 1;

template <typename Row>
std::vector<double> row_values(const Row& row) {
  std::vector<double> values(kNumTags);
  for (int t = 0; t < kNumTags; ++t) values[static_cast<std::size_t>(t)] = row(t);
  return values;
}

template <typename Row>
void read_row(const json& values, Row&& row) {
  if (!values.is_array() || values.size() != kNumTags) {
    throw std::runtime_error("model file: expected " + std::to_string(kNumTags) + " weights per row");
  }
  for (int t = 0; t < kNumTags; ++t) row(t) = values[static_cast<std::size_t>(t)].get<double>();
}

}  // namespace

void save_model(const CrfModel& model, std::ostream& out) {
  ordered_json obj;
  obj["format"] = kModelFormat;
  obj["version"] = kModelFormatVersion;
  obj["template_version"] = model.template_version;
  obj["constrained"] = model.constrained;
  ordered_json tags = ordered_json::array();
  for (Tag5 t : kAllTags) tags.push_back(std::string(tag_name(t)));
  obj["tags"] = std::move(tags);
  ordered_json transitions = ordered_json::array();
  for (int a = 0; a < kNumTags; ++a) transitions.push_back(row_values(model.transitions.row(a)));
  obj["transitions"] = std::move(transitions);
  obj["start"] = row_values(model.start);
  obj["end"] = row_values(model.end);
  ordered_json features = ordered_json::array();
  for (int f = 0; f < model.num_features(); ++f) {
    features.push_back(ordered_json::array(
        {model.feature_names[static_cast<std::size_t>(f)], row_values(model.feature_weights.row(f))}));
  }
  obj["features"] = std::move(features);
  out << obj.dump() << '\n';
}

void save_model(const CrfModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_model(model, out);
}

CrfModel load_model(std::istream& in) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
  if (obj.value("format", "") != kModelFormat || obj.value("version", 0) != kModelFormatVersion) {
    throw std::runtime_error("model file: unsupported format or version");
  }
  try {
    CrfModel model;
    model.template_version = obj.at("template_version").get<std::string>();
    model.constrained = obj.at("constrained").get<bool>();
    const json& transitions = obj.at("transitions");
    if (!transitions.is_array() || transitions.size() != kNumTags) {
      throw std::runtime_error("model file: transitions must be 5 x 5");
    }
    for (int a = 0; a < kNumTags; ++a) read_row(transitions[static_cast<std::size_t>(a)], model.transitions.row(a));
    read_row(obj.at("start"), model.start);
    read_row(obj.at("end"), model.end);
    const json& features = obj.at("features");
    model.feature_weights = WeightMatrix::Zero(static_cast<Eigen::Index>(features.size()), kNumTags);
    for (std::size_t f = 0; f < features.size(); ++f) {
      model.feature_names.push_back(features[f].at(0).get<std::string>());
      read_row(features[f].at(1), model.feature_weights.row(static_cast<Eigen::Index>(f)));
    }
    model.reindex();
    if (model.num_features() != static_cast<int>(features.size())) {
      throw std::runtime_error("model file: duplicate feature names");
    }
    return model;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("model file: ") + e.what());
  }
}

CrfModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_model(in);
}

}  // namespace spanlab
