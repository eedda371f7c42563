#include "spanlab/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spanlab/rng.hpp"

namespace spanlab {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::Random: return "random";
    case Method::MV: return "mv";
    case Method::ReL: return "rel";
  }
  return "?";
}

Method parse_method(std::string_view text) {
  if (text == "random") return Method::Random;
  if (text == "mv") return Method::MV;
  if (text == "rel") return Method::ReL;
  throw std::invalid_argument("unknown method \"" + std::string(text) + "\"");
}

std::vector<Hyperparams> ExperimentSpec::grid() const {
  std::vector<Hyperparams> out;
  for (double lr : learning_rates) {
    for (int batch : batch_sizes) out.push_back({lr, batch, epochs, l2});
  }
  return out;
}

void check_spec(const ExperimentSpec& spec) {
  if (spec.k < 2) throw ConfigError("k must be at least 2");
  if (!(spec.dev_fraction > 0.0 && spec.dev_fraction < 1.0)) throw ConfigError("dev_fraction must lie in (0, 1)");
  if (spec.methods.empty() || spec.levels.empty() || spec.golds.empty() || spec.seeds.empty()) {
    throw ConfigError("methods, levels, golds and seeds must be non-empty");
  }
  if (spec.learning_rates.empty() || spec.batch_sizes.empty()) throw ConfigError("tuning grid is empty");
  for (double lr : spec.learning_rates) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be positive");
  }
  for (int b : spec.batch_sizes) {
    if (b < 1) throw ConfigError("batch sizes must be positive");
  }
  if (spec.epochs < 1 || spec.l2 < 0.0) throw ConfigError("invalid epochs or l2");
}

ExperimentSpec read_experiment_config(KeyValueConfig& kv) {
  ExperimentSpec spec;
  auto wrap = [](auto&& parse) {
    try {
      return parse();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  };
  spec.corpus_path = kv.get_string("corpus", spec.corpus_path);
  spec.k = static_cast<int>(kv.get_int("k", spec.k));
  spec.dev_fraction = kv.get_double("dev_fraction", spec.dev_fraction);
  spec.split_seed = kv.get_uint("split_seed", spec.split_seed);
  if (kv.has("modes")) {
    spec.methods.clear();
    for (const auto& m : kv.get_list("modes", {})) spec.methods.push_back(wrap([&] { return parse_method(m); }));
  }
  if (kv.has("levels")) {
    spec.levels.clear();
    for (const auto& l : kv.get_list("levels", {})) spec.levels.push_back(wrap([&] { return parse_level(l); }));
  }
  if (kv.has("golds")) {
    spec.golds.clear();
    for (const auto& g : kv.get_list("golds", {})) spec.golds.push_back(wrap([&] { return parse_gold_type(g); }));
  }
  if (kv.has("seeds")) {
    spec.seeds.clear();
    for (long s : parse_int_list(kv.get_list("seeds", {}), "seeds")) {
      if (s < 0) throw ConfigError("seeds must be non-negative");
      spec.seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (kv.has("lr_grid")) spec.learning_rates = parse_double_list(kv.get_list("lr_grid", {}), "lr_grid");
  if (kv.has("batch_grid")) {
    spec.batch_sizes.clear();
    for (long b : parse_int_list(kv.get_list("batch_grid", {}), "batch_grid")) spec.batch_sizes.push_back(static_cast<int>(b));
  }
  spec.epochs = static_cast<int>(kv.get_int("epochs", spec.epochs));
  spec.l2 = kv.get_double("l2", spec.l2);
  spec.constrained = kv.get_bool("constrained", spec.constrained);
  spec.tune_every_fold = kv.get_bool("tune_every_fold", spec.tune_every_fold);
  spec.out_dir = kv.get_string("out", spec.out_dir);
  kv.finish();
  check_spec(spec);
  return spec;
}

namespace {

std::vector<InputKey> keys_of(const Corpus& corpus) {
  std::vector<InputKey> keys;
  for (const auto& input : corpus.inputs) keys.push_back(input.key());
  return keys;
}

Scores mean_of(const std::vector<Scores>& xs) {
  Scores m;
  for (const auto& s : xs) {
    m.precision += s.precision;
    m.recall += s.recall;
    m.f1 += s.f1;
  }
  const double n = static_cast<double>(xs.size());
  return {m.precision / n, m.recall / n, m.f1 / n};
}

Scores std_of(const std::vector<Scores>& xs, const Scores& mean) {
  if (xs.size() < 2) return {};
  Scores v;
  for (const auto& s : xs) {
    v.precision += (s.precision - mean.precision) * (s.precision - mean.precision);
    v.recall += (s.recall - mean.recall) * (s.recall - mean.recall);
    v.f1 += (s.f1 - mean.f1) * (s.f1 - mean.f1);
  }
  const double d = static_cast<double>(xs.size() - 1);
  return {std::sqrt(v.precision / d), std::sqrt(v.recall / d), std::sqrt(v.f1 / d)};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const Corpus& corpus, ExperimentObserver* observer) {
  check_spec(spec);
  const FoldPlan plan = split_folds(corpus, spec.k, spec.dev_fraction, spec.split_seed);
  const std::vector<Hyperparams> grid = spec.grid();

  ExperimentResult result;
  std::map<std::pair<Method, std::uint64_t>, Predictions> merged;
  std::map<Method, Hyperparams> chosen;

  for (int f = 0; f < spec.k; ++f) {
    const Fold& fold = plan.folds[static_cast<std::size_t>(f)];
    const Corpus train_split = corpus.subset(fold.train);
    const Corpus dev_split = corpus.subset(fold.dev);
    const Corpus test_split = corpus.subset(fold.test);
    const std::vector<InputKey> test_keys = keys_of(test_split);

    for (Method method : spec.methods) {
      if (method == Method::Random) continue;
      if (f == 0 || spec.tune_every_fold) {
        if (observer) {
          observer->on_training_data(f, "tune-train", train_split);
          observer->on_training_data(f, "tune-dev", dev_split);
        }
        const TrainingMode mode = method == Method::MV ? TrainingMode::MV : TrainingMode::ReL;
        TuneResult tuned = tune(train_split, dev_split, grid, mode, spec.seeds.front(), spec.constrained);
        chosen[method] = tuned.best;
        result.tuning.push_back({f + 1, method, tuned.best, std::move(tuned.dev_word_f1)});
      }
    }

    for (std::uint64_t seed : spec.seeds) {
      for (Method method : spec.methods) {
        Predictions predictions;
        if (method == Method::Random) {
          Rng rng(mix_seed(seed, 0x52414E44ULL + static_cast<std::uint64_t>(f)));
          predictions = random_predictions(test_split, rng);
        } else {
          if (observer) observer->on_training_data(f, "train", train_split);
          const TrainingMode mode = method == Method::MV ? TrainingMode::MV : TrainingMode::ReL;
          const CrfModel model = train(train_split, mode, chosen.at(method), mix_seed(seed, static_cast<std::uint64_t>(f)),
                                       spec.constrained);
          predictions = predict_corpus(model, test_split);
        }
        auto& all = merged[{method, seed}];
        for (const auto& [key, spans] : predictions) all.emplace(key, spans);
        result.fold_predictions.push_back({method, seed, f + 1, test_keys, std::move(predictions)});
      }
    }
  }

  for (Method method : spec.methods) {
    for (GoldType gold : spec.golds) {
      for (EvalLevel level : spec.levels) {
        std::vector<Scores> per_seed;
        for (std::uint64_t seed : spec.seeds) {
          const EvalReport report = evaluate(merged.at({method, seed}), corpus, level, gold);
          result.runs.push_back({method, seed, gold, level, report.totals, report.scores});
          per_seed.push_back(report.scores);
        }
        const Scores mean = mean_of(per_seed);
        result.summary.push_back({method, gold, level, mean, std_of(per_seed, mean)});
      }
    }
  }
  if (std::find(spec.golds.begin(), spec.golds.end(), GoldType::Majority) != spec.golds.end()) {
    for (EvalLevel level : spec.levels) {
      EvalReport report = expert_estimate(corpus, level);
      report.per_input.clear();
      result.expert.push_back(std::move(report));
    }
  }
  return result;
}

namespace {

ordered_json config_json(const ExperimentSpec& spec) {
  ordered_json c;
  c["corpus"] = spec.corpus_path;
  c["k"] = spec.k;
  c["dev_fraction"] = spec.dev_fraction;
  c["split_seed"] = spec.split_seed;
  ordered_json methods = ordered_json::array();
  for (Method m : spec.methods) methods.push_back(std::string(to_string(m)));
  c["modes"] = methods;
  ordered_json levels = ordered_json::array();
  for (EvalLevel l : spec.levels) levels.push_back(std::string(to_string(l)));
  c["levels"] = levels;
  ordered_json golds = ordered_json::array();
  for (GoldType g : spec.golds) golds.push_back(std::string(to_string(g)));
  c["golds"] = golds;
  c["seeds"] = spec.seeds;
  c["lr_grid"] = spec.learning_rates;
  c["batch_grid"] = spec.batch_sizes;
  c["epochs"] = spec.epochs;
  c["l2"] = spec.l2;
  c["constrained"] = spec.constrained;
  c["tune_every_fold"] = spec.tune_every_fold;
  c["feature_template"] = std::string(kFeatureTemplateVersion);
  return c;
}

ordered_json scores_json(const Scores& s) {
  ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  return j;
}

ordered_json report_json(const Scores& s, const MatchCounts& c) {
  ordered_json j = scores_json(s);
  j["matched"] = c.matched;
  j["predicted"] = c.predicted;
  j["gold"] = c.gold;
  return j;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

// Shortest text that reads back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

}  // namespace

std::string results_json(const ExperimentSpec& spec, const ExperimentResult& result) {
  ordered_json root;
  root["config"] = config_json(spec);

  ordered_json tuning = ordered_json::array();
  for (const auto& t : result.tuning) {
    ordered_json j;
    j["fold"] = t.fold;
    j["mode"] = std::string(to_string(t.method));
    j["learning_rate"] = t.chosen.learning_rate;
    j["batch_size"] = t.chosen.batch_size;
    j["dev_word_f1"] = t.dev_word_f1;
    tuning.push_back(std::move(j));
  }
  root["tuning"] = std::move(tuning);

  ordered_json runs = ordered_json::array();
  for (const auto& r : result.runs) {
    ordered_json j;
    j["mode"] = std::string(to_string(r.method));
    j["seed"] = r.seed;
    j["gold_type"] = std::string(to_string(r.gold));
    j["level"] = std::string(to_string(r.level));
    j.update(report_json(r.scores, r.counts));
    runs.push_back(std::move(j));
  }
  root["runs"] = std::move(runs);

  ordered_json summary = ordered_json::array();
  for (const auto& s : result.summary) {
    ordered_json j;
    j["mode"] = std::string(to_string(s.method));
    j["gold_type"] = std::string(to_string(s.gold));
    j["level"] = std::string(to_string(s.level));
    j["mean"] = scores_json(s.mean);
    j["std"] = scores_json(s.std);
    summary.push_back(std::move(j));
  }
  root["summary"] = std::move(summary);

  ordered_json expert = ordered_json::array();
  for (const auto& e : result.expert) {
    ordered_json j;
    j["gold_type"] = "majority";
    j["level"] = std::string(to_string(e.level));
    j.update(report_json(e.scores, e.totals));
    expert.push_back(std::move(j));
  }
  root["expert"] = std::move(expert);
  return root.dump(2) + "\n";
}

std::string format_mean_std(double mean, double std) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.1f (%.1f)", 100.0 * mean, 100.0 * std);
  return buffer;
}

std::string results_table(const ExperimentSpec& spec, const ExperimentResult& result) {
  std::ostringstream out;
  out << "# Resolved configuration\n";
  std::istringstream cfg(resolved_config(spec));
  for (std::string line; std::getline(cfg, line);) out << "# " << line << '\n';
  out << "# Mean (std) across " << spec.seeds.size() << " seeds, percentages\n";

  auto cell = [&](Method m, GoldType g, EvalLevel l, int metric) -> std::string {
    for (const auto& s : result.summary) {
      if (s.method == m && s.gold == g && s.level == l) {
        const double mean[] = {s.mean.precision, s.mean.recall, s.mean.f1};
        const double sd[] = {s.std.precision, s.std.recall, s.std.f1};
        return format_mean_std(mean[metric], sd[metric]);
      }
    }
    return "-";
  };
  auto expert_cell = [&](EvalLevel l, int metric) -> std::string {
    for (const auto& e : result.expert) {
      if (e.level == l) {
        const double v[] = {e.scores.precision, e.scores.recall, e.scores.f1};
        char buffer[32];
        std::snprintf(buffer, sizeof buffer, "%.1f", 100.0 * v[metric]);
        return buffer;
      }
    }
    return "-";
  };

  char line[256];
  for (GoldType gold : spec.golds) {
    out << '\n' << (gold == GoldType::Majority ? "Majority-voted gold spans" : "Best-matched gold spans") << '\n';
    std::snprintf(line, sizeof line, "%-8s %12s %12s %12s %12s %12s %12s\n", "Method", "Span P", "Span R",
                  "Span F1", "Word P", "Word R", "Word F1");
    out << line;
    auto row = [&](const std::string& name, auto&& value) {
      std::snprintf(line, sizeof line, "%-8s", name.c_str());
      out << line;
      for (EvalLevel level : {EvalLevel::Span, EvalLevel::Word}) {
        for (int metric = 0; metric < 3; ++metric) {
          std::snprintf(line, sizeof line, " %12s", value(level, metric).c_str());
          out << line;
        }
      }
      out << '\n';
    };
    for (Method m : {Method::Random, Method::MV, Method::ReL}) {
      if (std::find(spec.methods.begin(), spec.methods.end(), m) == spec.methods.end()) continue;
      const std::string name = m == Method::Random ? "Random" : (m == Method::MV ? "MV" : "ReL");
      row(name, [&](EvalLevel l, int metric) { return cell(m, gold, l, metric); });
    }
    if (gold == GoldType::Majority && !result.expert.empty()) {
      row("Expert", [&](EvalLevel l, int metric) { return expert_cell(l, metric); });
    }
  }
  return out.str();
}

std::string resolved_config(const ExperimentSpec& spec) {
  std::vector<std::string> methods, levels, golds, seeds, lrs, batches;
  for (Method m : spec.methods) methods.emplace_back(to_string(m));
  for (EvalLevel l : spec.levels) levels.emplace_back(to_string(l));
  for (GoldType g : spec.golds) golds.emplace_back(to_string(g));
  for (auto s : spec.seeds) seeds.push_back(std::to_string(s));
  for (double lr : spec.learning_rates) lrs.push_back(format_double(lr));
  for (int b : spec.batch_sizes) batches.push_back(std::to_string(b));
  std::ostringstream out;
  out << "corpus = " << spec.corpus_path << '\n'
      << "k = " << spec.k << '\n'
      << "dev_fraction = " << format_double(spec.dev_fraction) << '\n'
      << "split_seed = " << spec.split_seed << '\n'
      << "modes = " << join_list(methods) << '\n'
      << "levels = " << join_list(levels) << '\n'
      << "golds = " << join_list(golds) << '\n'
      << "seeds = " << join_list(seeds) << '\n'
      << "lr_grid = " << join_list(lrs) << '\n'
      << "batch_grid = " << join_list(batches) << '\n'
      << "epochs = " << spec.epochs << '\n'
      << "l2 = " << format_double(spec.l2) << '\n'
      << "constrained = " << (spec.constrained ? "true" : "false") << '\n'
      << "tune_every_fold = " << (spec.tune_every_fold ? "true" : "false") << '\n'
      << "out = " << spec.out_dir << '\n';
  return out.str();
}

void write_experiment_outputs(const ExperimentSpec& spec, const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "predictions");
  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
  };
  write(fs::path(out_dir) / "results.json", results_json(spec, result));
  write(fs::path(out_dir) / "results.txt", results_table(spec, result));
  write(fs::path(out_dir) / "resolved.cfg", resolved_config(spec));
  for (const auto& fp : result.fold_predictions) {
    char name[128];
    std::snprintf(name, sizeof name, "%s_seed%llu_fold%02d.jsonl", std::string(to_string(fp.method)).c_str(),
                  static_cast<unsigned long long>(fp.seed), fp.fold);
    std::ofstream out(fs::path(out_dir) / "predictions" / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string("cannot write prediction file ") + name);
    write_predictions(fp.predictions, fp.order, out);
  }
}

}  // namespace spanlab
