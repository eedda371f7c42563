#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "spanlab/experiment.hpp"
#include "spanlab/synth.hpp"

using namespace spanlab;
namespace fs = std::filesystem;

namespace {

Corpus small_corpus() {
  SynthConfig config;
  config.n_docs = 24;
  config.seed = 3;
  NoiseModel noise;
  noise.p_drop = 0.2;
  noise.jitter = 1;
  noise.jitter_prob = 0.3;
  noise.p_spurious = 0.1;
  return synthesize(config, noise).corpus;
}

ExperimentSpec small_spec() {
  ExperimentSpec spec;
  spec.k = 3;
  spec.seeds = {1, 2};
  spec.learning_rates = {0.1, 0.5};
  spec.batch_sizes = {8};
  spec.epochs = 2;
  return spec;
}

// Fails the test if any training or tuning corpus touches the fold's test
// documents.
class LeakageGuard : public ExperimentObserver {
 public:
  explicit LeakageGuard(const FoldPlan& plan) : plan_(plan) {}

  void on_training_data(int fold, std::string_view purpose, const Corpus& data) override {
    const Fold& f = plan_.folds.at(static_cast<std::size_t>(fold));
    const std::set<std::string> test(f.test.begin(), f.test.end());
    for (const auto& input : data.inputs) {
      CHECK_MESSAGE(!test.contains(input.document->doc_id), purpose);
    }
    ++calls;
  }

  int calls = 0;

 private:
  const FoldPlan& plan_;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("experiment never trains on test documents") {
  const Corpus corpus = small_corpus();
  ExperimentSpec spec = small_spec();
  spec.tune_every_fold = true;
  const FoldPlan plan = split_folds(corpus, spec.k, spec.dev_fraction, spec.split_seed);
  LeakageGuard guard(plan);
  const ExperimentResult result = run_experiment(spec, corpus, &guard);
  // Per fold: tune-train and tune-dev for two methods, plus a train call per
  // method and seed.
  CHECK(guard.calls == spec.k * (2 * 2 + 2 * 2));
  CHECK(result.tuning.size() == 6);
}

TEST_CASE("experiment results cover every configured cell") {
  const Corpus corpus = small_corpus();
  const ExperimentSpec spec = small_spec();
  const ExperimentResult result = run_experiment(spec, corpus);
  CHECK(result.summary.size() == 3 * 2 * 2);
  CHECK(result.runs.size() == 3 * 2 * 2 * 2);
  CHECK(result.expert.size() == 2);
  CHECK(result.tuning.size() == 2);  // fold 1 only
  for (const auto& t : result.tuning) CHECK(t.fold == 1);
  CHECK(result.fold_predictions.size() == static_cast<std::size_t>(3 * 2 * 3));

  // Merged predictions cover every input exactly once per method and seed.
  std::map<std::pair<Method, std::uint64_t>, std::size_t> covered;
  for (const auto& fp : result.fold_predictions) covered[{fp.method, fp.seed}] += fp.predictions.size();
  for (const auto& [key, n] : covered) CHECK(n == corpus.inputs.size());

  const std::string table = results_table(spec, result);
  for (const char* needle : {"Majority-voted", "Best-matched", "Random", "MV", "ReL", "Expert", "Span F1", "Word F1",
                             "# k = 3", "# seeds = 1,2"}) {
    CHECK_MESSAGE(table.find(needle) != std::string::npos, needle);
  }
}

TEST_CASE("experiment outputs are reproducible") {
  const Corpus corpus = small_corpus();
  const ExperimentSpec spec = small_spec();
  const fs::path dir = fs::temp_directory_path() / "spanlab_experiment_test";
  fs::remove_all(dir);
  write_experiment_outputs(spec, run_experiment(spec, corpus), (dir / "a").string());
  write_experiment_outputs(spec, run_experiment(spec, corpus), (dir / "b").string());
  for (const char* name : {"results.json", "results.txt", "resolved.cfg"}) {
    CHECK(fs::exists(dir / "a" / name));
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  CHECK(fs::exists(dir / "a" / "predictions" / "mv_seed1_fold01.jsonl"));
  CHECK(fs::exists(dir / "a" / "predictions" / "random_seed2_fold03.jsonl"));

  const auto json = nlohmann::json::parse(slurp(dir / "a" / "results.json"));
  CHECK(json.at("config").at("k") == 3);
  CHECK(json.at("summary").size() == 12);
  CHECK(json.contains("expert"));
  fs::remove_all(dir);
}

TEST_CASE("resolved configuration reads back unchanged") {
  ExperimentSpec spec = small_spec();
  spec.corpus_path = "data/corpus.jsonl";
  spec.dev_fraction = 0.1;
  const std::string text = resolved_config(spec);
  CHECK(text.find("dev_fraction = 0.1\n") != std::string::npos);
  std::istringstream in(text);
  KeyValueConfig kv = KeyValueConfig::parse(in);
  const ExperimentSpec back = read_experiment_config(kv);
  CHECK(resolved_config(back) == text);
}

TEST_CASE("experiment configuration errors") {
  std::istringstream in("k = 1\n");
  KeyValueConfig kv = KeyValueConfig::parse(in);
  CHECK_THROWS_AS(read_experiment_config(kv), ConfigError);
  std::istringstream unknown("corpus = x\nfolds = 3\n");
  KeyValueConfig kv2 = KeyValueConfig::parse(unknown);
  CHECK_THROWS_AS(read_experiment_config(kv2), ConfigError);
  std::istringstream modes("corpus = x\nmodes = \n");
  KeyValueConfig kv3 = KeyValueConfig::parse(modes);
  CHECK_THROWS(read_experiment_config(kv3));
}

TEST_CASE("mean and std formatting") {
  CHECK(format_mean_std(0.179, 0.019) == "17.9 (1.9)");
  CHECK(format_mean_std(1.0, 0.0) == "100.0 (0.0)");
  CHECK(to_string(Method::ReL) == "rel");
  CHECK(parse_method("random") == Method::Random);
}
