#include "doctest.h"
#include "fixtures.hpp"
#include "spanlab/aggregate.hpp"
#include "spanlab/evaluate.hpp"

using namespace spanlab;
using namespace spanlab::testing;

TEST_CASE("match_counts") {
  const SpanSet gold = {{3, 5}, {9, 12}};
  CHECK(match_counts({{3, 5}}, gold, 14, EvalLevel::Span) == MatchCounts{1, 1, 2});
  CHECK(match_counts({{3, 5}}, gold, 14, EvalLevel::Word) == MatchCounts{3, 3, 7});
  CHECK(match_counts({{2, 6}}, {{3, 5}}, 14, EvalLevel::Span) == MatchCounts{0, 1, 1});
  CHECK(match_counts({{2, 6}}, {{3, 5}}, 14, EvalLevel::Word) == MatchCounts{3, 5, 3});
  CHECK(match_counts({}, {}, 4, EvalLevel::Span) == MatchCounts{0, 0, 0});
}

TEST_CASE("prf") {
  const Scores a = prf({1, 1, 2});
  CHECK(a.precision == doctest::Approx(1.0));
  CHECK(a.recall == doctest::Approx(0.5));
  CHECK(a.f1 == doctest::Approx(2.0 / 3.0));
  const Scores empty = prf({0, 0, 0});
  CHECK(empty.precision == 1.0);
  CHECK(empty.recall == 1.0);
  CHECK(empty.f1 == 1.0);
  const Scores none = prf({0, 5, 3});
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(prf({0, 0, 4}).f1 == 0.0);
  CHECK(prf({0, 4, 0}).precision == 0.0);
}

TEST_CASE("evaluate_corpus against majority gold") {
  const Corpus corpus = dismissal_corpus();
  const InputKey key{"d1", "EMPLOYMENT"};

  SUBCASE("identity") {
    for (EvalLevel level : {EvalLevel::Span, EvalLevel::Word}) {
      CHECK(evaluate_corpus({{key, {{3, 5}, {9, 12}}}}, corpus, level).scores.f1 == 1.0);
    }
  }
  SUBCASE("partial prediction") {
    const Predictions p = {{key, {{3, 5}}}};
    CHECK(evaluate_corpus(p, corpus, EvalLevel::Span).scores.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(evaluate_corpus(p, corpus, EvalLevel::Word).scores.f1 == doctest::Approx(0.6));
  }
  SUBCASE("missing prediction names the input") {
    try {
      evaluate_corpus({}, corpus, EvalLevel::Span);
      FAIL("expected an error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("d1/EMPLOYMENT") != std::string::npos);
    }
  }
  SUBCASE("prediction past the end of the document") {
    CHECK_THROWS_AS(evaluate_corpus({{key, {{13, 15}}}}, corpus, EvalLevel::Word), ValidationError);
  }
}

TEST_CASE("micro averaging sums counts before scoring") {
  // Two inputs with span-level counts (1,1,2) and (1,1,1).
  auto doc = std::make_shared<const Document>(Document{"d", {"a", "b", "c", "d", "e", "f"}});
  Corpus corpus;
  corpus.inputs.push_back({doc, "X", {{"a1", {{1, 1}, {3, 3}}}}});
  corpus.inputs.push_back({doc, "Y", {{"a1", {{5, 6}}}}});
  const Predictions p = {{{"d", "X"}, {{1, 1}}}, {{"d", "Y"}, {{5, 6}}}};
  const EvalReport r = evaluate_corpus(p, corpus, EvalLevel::Span);
  CHECK(r.totals == MatchCounts{2, 2, 3});
  CHECK(r.scores.precision == doctest::Approx(1.0));
  CHECK(r.scores.recall == doctest::Approx(2.0 / 3.0));
  MatchCounts sum;
  for (const auto& i : r.per_input) sum += i.counts;
  CHECK(sum == r.totals);
}

TEST_CASE("best_match_select") {
  const auto records = dismissal_records();
  const BestMatch m = best_match_select({{3, 5}}, records, 14, EvalLevel::Span);
  CHECK(m.annotator_id == "A2");
  CHECK(m.counts == MatchCounts{1, 1, 2});

  CHECK(best_match_select({{1, 5}, {8, 12}}, records, 14, EvalLevel::Span).annotator_id == "A1");

  const std::vector<AnnotationRecord> twins = {{"b", {{1, 3}}}, {"a", {{1, 3}}}};
  CHECK(best_match_select({{1, 3}}, twins, 5, EvalLevel::Span).annotator_id == "a");
}

TEST_CASE("best_match_select is the argmax over annotators") {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(1, 20));
    const auto records = random_records(rng, n, static_cast<int>(rng.uniform_int(1, 5)));
    const SpanSet pred = random_span_set(rng, n);
    for (EvalLevel level : {EvalLevel::Span, EvalLevel::Word}) {
      const BestMatch m = best_match_select(pred, records, n, level);
      const double best = prf(m.counts).f1;
      for (const auto& r : records) CHECK(prf(match_counts(pred, r.spans, n, level)).f1 <= best);
    }
  }
}

TEST_CASE("evaluate_best_matched") {
  const Corpus corpus = dismissal_corpus();
  const InputKey key{"d1", "EMPLOYMENT"};
  const EvalReport r = evaluate_best_matched({{key, {{3, 5}}}}, corpus, EvalLevel::Span);
  CHECK(r.gold_type == GoldType::BestMatched);
  CHECK(r.scores.precision == doctest::Approx(1.0));
  CHECK(r.scores.recall == doctest::Approx(0.5));
  CHECK(r.per_input.at(0).annotator_id == "A2");

  const EvalReport exact = evaluate_best_matched({{key, {{1, 5}, {8, 12}}}}, corpus, EvalLevel::Word);
  CHECK(exact.scores.f1 == 1.0);
}

TEST_CASE("expert_estimate") {
  SUBCASE("dismissal sentence") {
    const EvalReport span = expert_estimate(dismissal_corpus(), EvalLevel::Span);
    // A2 matches (3,5) of the gold {(3,5),(9,12)}: P = 1/2, R = 1/2.
    CHECK(span.scores.f1 == doctest::Approx(0.5));
    CHECK(span.per_input.at(0).annotator_id == "A2");
  }
  SUBCASE("an annotator equal to the majority is perfect") {
    auto doc = std::make_shared<const Document>(Document{"d", std::vector<std::string>(10, "w")});
    Corpus corpus;
    corpus.inputs.push_back({doc, "L", {{"a", {{2, 4}}}, {"b", {{2, 4}, {7, 9}}}, {"c", {{2, 4}}}}});
    for (EvalLevel level : {EvalLevel::Span, EvalLevel::Word}) CHECK(expert_estimate(corpus, level).scores.f1 == 1.0);
  }
  SUBCASE("never below any single annotator, per input") {
    Rng rng(9);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = static_cast<int>(rng.uniform_int(1, 20));
      auto doc = std::make_shared<const Document>(Document{"d", std::vector<std::string>(static_cast<std::size_t>(n), "w")});
      Corpus corpus;
      corpus.inputs.push_back({doc, "L", random_records(rng, n, static_cast<int>(rng.uniform_int(1, 5)))});
      const SpanSet gold = majority_vote(corpus.inputs[0]);
      for (EvalLevel level : {EvalLevel::Span, EvalLevel::Word}) {
        const double expert = expert_estimate(corpus, level).scores.f1;
        for (const auto& r : corpus.inputs[0].records) CHECK(prf(match_counts(r.spans, gold, n, level)).f1 <= expert);
      }
    }
  }
}

TEST_CASE("level and gold names") {
  CHECK(parse_level("word") == EvalLevel::Word);
  CHECK(parse_gold_type("best-matched") == GoldType::BestMatched);
  CHECK_THROWS_AS(parse_level("token"), std::invalid_argument);
}
