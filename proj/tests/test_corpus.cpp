#include <set>
#include <sstream>

#include "doctest.h"
#include "spanlab/corpus.hpp"
#include "spanlab/rng.hpp"

using namespace spanlab;

namespace {

const char* kMinimal =
    R"({"doc_id":"d1","words":["I","was","fired"],"label":"EMPLOYMENT","annotations":[{"annotator_id":"a1","spans":[[1,3]]}]})";

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

Corpus read_unchecked(const std::string& text) {
  std::istringstream in(text);
  return read_corpus_unchecked(in);
}

std::string line_with(const std::string& doc, int n, const std::string& label, const std::string& annotations) {
  std::string words;
  for (int i = 1; i <= n; ++i) words += (i > 1 ? "," : "") + std::string("\"w") + std::to_string(i) + "\"";
  return R"({"doc_id":")" + doc + R"(","words":[)" + words + R"(],"label":")" + label +
         R"(","annotations":)" + annotations + "}\n";
}

Corpus make_corpus(int docs, int labels_per_doc) {
  std::string text;
  for (int d = 0; d < docs; ++d) {
    for (int l = 0; l < labels_per_doc; ++l) {
      text += line_with("doc" + std::to_string(d), 8, "L" + std::to_string(l),
                        R"([{"annotator_id":"a1","spans":[[2,4]]}])");
    }
  }
  return parse(text);
}

}  // namespace

TEST_CASE("parse_corpus reads a minimal record") {
  const Corpus corpus = parse(kMinimal);
  REQUIRE(corpus.inputs.size() == 1);
  const auto& input = corpus.inputs[0];
  CHECK(input.key() == InputKey{"d1", "EMPLOYMENT"});
  CHECK(input.length() == 3);
  REQUIRE(input.records.size() == 1);
  CHECK(input.records[0].annotator_id == "a1");
  CHECK(input.records[0].spans == SpanSet{{1, 3}});
}

TEST_CASE("parse_corpus errors") {
  SUBCASE("span end beyond the document") {
    std::string text = kMinimal;
    text.replace(text.find("[[1,3]]"), 7, "[[2,4]]");
    try {
      parse(text);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("span end 4 exceeds N=3") != std::string::npos);
      CHECK(std::string(e.what()).find("d1/EMPLOYMENT/a1") != std::string::npos);
    }
  }
  SUBCASE("duplicate input") {
    try {
      parse(std::string(kMinimal) + "\n" + kMinimal + "\n");
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("duplicate input d1/EMPLOYMENT") != std::string::npos);
    }
  }
  SUBCASE("malformed line reports its number") {
    try {
      parse(std::string(kMinimal) + "\n\n{not json}\n");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("missing field") {
    CHECK_THROWS_AS(parse(R"({"doc_id":"d1","words":["a"],"label":"L"})"), ParseError);
  }
  SUBCASE("span that is not a pair") {
    CHECK_THROWS_AS(parse(line_with("d", 3, "L", R"([{"annotator_id":"a","spans":[[1]]}])")), ParseError);
  }
  SUBCASE("no annotators") {
    CHECK_THROWS_AS(parse(line_with("d", 3, "L", "[]")), ValidationError);
  }
  SUBCASE("same doc_id with different words") {
    const std::string other = R"({"doc_id":"d1","words":["x"],"label":"OTHER","annotations":[{"annotator_id":"a1","spans":[]}]})";
    CHECK_THROWS_AS(parse(std::string(kMinimal) + "\n" + other), ValidationError);
  }
}

TEST_CASE("inputs sharing a doc_id share one document") {
  const Corpus corpus = make_corpus(1, 2);
  REQUIRE(corpus.inputs.size() == 2);
  CHECK(corpus.inputs[0].document == corpus.inputs[1].document);
  CHECK(corpus.doc_ids() == std::vector<std::string>{"doc0"});
}

TEST_CASE("validate policies") {
  SUBCASE("two-word annotator span") {
    const Corpus c = read_unchecked(line_with("d", 10, "L", R"([{"annotator_id":"a","spans":[[5,6]]}])"));
    const auto v = validate(c, ValidationPolicy::AnnotatorInput);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("span shorter than 3 words") != std::string::npos);
    CHECK(validate(c, ValidationPolicy::Lenient).empty());
  }
  SUBCASE("exactly three words") {
    const Corpus c = read_unchecked(line_with("d", 10, "L", R"([{"annotator_id":"a","spans":[[5,7]]}])"));
    CHECK(validate(c, ValidationPolicy::AnnotatorInput).empty());
  }
  SUBCASE("overlap") {
    const Corpus c = read_unchecked(line_with("d", 10, "L", R"([{"annotator_id":"a","spans":[[1,4],[3,6]]}])"));
    const auto v = validate(c, ValidationPolicy::Lenient);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("overlap") != std::string::npos);
  }
  SUBCASE("duplicate annotator") {
    const Corpus c = read_unchecked(
        line_with("d", 10, "L", R"([{"annotator_id":"a","spans":[]},{"annotator_id":"a","spans":[]}])"));
    CHECK(validate(c, ValidationPolicy::Lenient).size() == 1);
  }
}

TEST_CASE("unsorted spans are sorted on read") {
  const Corpus c = parse(line_with("d", 10, "L", R"([{"annotator_id":"a","spans":[[6,8],[1,3]]}])"));
  CHECK(c.inputs[0].records[0].spans == SpanSet{{1, 3}, {6, 8}});
}

TEST_CASE("write_corpus then parse_corpus is the identity") {
  Rng rng(5);
  std::string text;
  for (int d = 0; d < 30; ++d) {
    const int n = static_cast<int>(rng.uniform_int(3, 20));
    for (int l = 0; l < 2; ++l) {
      std::string annotations = "[";
      for (int a = 0; a < 3; ++a) {
        const int b = static_cast<int>(rng.uniform_int(1, n - 2));
        annotations += std::string(a ? "," : "") + R"({"annotator_id":"a)" + std::to_string(a) +
                       R"(","spans":[[)" + std::to_string(b) + "," + std::to_string(b + 2) + "]]}";
      }
      text += line_with("doc" + std::to_string(d), n, "L" + std::to_string(l), annotations + "]");
    }
  }
  const Corpus original = parse(text);
  std::ostringstream out;
  write_corpus(original, out);
  CHECK(parse(out.str()) == original);
  std::ostringstream again;
  write_corpus(parse(out.str()), again);
  CHECK(again.str() == out.str());
}

TEST_CASE("split_folds") {
  const Corpus corpus = make_corpus(20, 2);

  SUBCASE("20 documents, 20 folds") {
    const FoldPlan plan = split_folds(corpus, 20, 0.1, 7);
    REQUIRE(plan.folds.size() == 20);
    std::multiset<std::string> tested;
    for (const Fold& fold : plan.folds) {
      CHECK(fold.test.size() == 1);
      CHECK(fold.dev.size() == 2);  // round(0.1 * 19)
      CHECK(fold.train.size() == 17);
      std::set<std::string> train(fold.train.begin(), fold.train.end());
      for (const auto& id : fold.dev) CHECK_FALSE(train.contains(id));
      for (const auto& id : fold.test) {
        CHECK_FALSE(train.contains(id));
        tested.insert(id);
      }
    }
    const auto ids = corpus.doc_ids();
    CHECK(tested == std::multiset<std::string>(ids.begin(), ids.end()));
  }

  SUBCASE("determinism and seed sensitivity") {
    const FoldPlan a = split_folds(corpus, 5, 0.1, 7);
    const FoldPlan b = split_folds(corpus, 5, 0.1, 7);
    const FoldPlan c = split_folds(corpus, 5, 0.1, 8);
    std::ostringstream sa, sb, sc;
    write_fold_plan(a, sa);
    write_fold_plan(b, sb);
    write_fold_plan(c, sc);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != sc.str());
  }

  SUBCASE("uneven sizes differ by at most one") {
    const FoldPlan plan = split_folds(corpus, 6, 0.1, 1);
    for (const Fold& fold : plan.folds) CHECK((fold.test.size() == 3 || fold.test.size() == 4));
  }

  SUBCASE("too many folds") { CHECK_THROWS_AS(split_folds(corpus, 21, 0.1, 1), std::invalid_argument); }

  SUBCASE("subset keeps all labels of a document together") {
    const FoldPlan plan = split_folds(corpus, 4, 0.1, 3);
    const Corpus test = corpus.subset(plan.folds[0].test);
    CHECK(test.inputs.size() == 2 * plan.folds[0].test.size());
  }
}

TEST_CASE("predictions JSONL") {
  std::istringstream in(
      R"({"doc_id":"d1","label":"L","spans":[[5,6],[1,2]]})"
      "\n"
      R"({"doc_id":"d2","label":"L","spans":[]})"
      "\n");
  const Predictions p = parse_predictions(in);
  CHECK(p.at({"d1", "L"}) == SpanSet{{1, 2}, {5, 6}});
  CHECK(p.at({"d2", "L"}).empty());
  std::ostringstream out;
  write_predictions(p, {{"d2", "L"}, {"d1", "L"}}, out);
  CHECK(out.str() ==
        "{\"doc_id\":\"d2\",\"label\":\"L\",\"spans\":[]}\n"
        "{\"doc_id\":\"d1\",\"label\":\"L\",\"spans\":[[1,2],[5,6]]}\n");

  std::istringstream overlapping(R"({"doc_id":"d1","label":"L","spans":[[1,3],[2,4]]})");
  CHECK_THROWS_AS(parse_predictions(overlapping), ParseError);
}

TEST_CASE("export_conll") {
  const std::vector<std::string> words = {"w1", "w2", "w3"};
  SUBCASE("gold span, empty prediction") {
    std::ostringstream out;
    export_conll({{words, encode_spans({{1, 3}}, 3), encode_spans({}, 3)}}, out);
    CHECK(out.str() == "w1 B-SPAN O\nw2 I-SPAN O\nw3 E-SPAN O\n\n");
  }
  SUBCASE("outside only") {
    std::ostringstream out;
    export_conll({{words, encode_spans({}, 3), encode_spans({}, 3)}}, out);
    CHECK(out.str() == "w1 O O\nw2 O O\nw3 O O\n\n");
  }
  SUBCASE("two documents") {
    const std::vector<std::string> other = {"x"};
    std::ostringstream out;
    export_conll({{words, encode_spans({{2, 2}}, 3), encode_spans({{2, 2}}, 3)},
                  {other, encode_spans({}, 1), encode_spans({{1, 1}}, 1)}},
                 out);
    CHECK(out.str() == "w1 O O\nw2 S-SPAN S-SPAN\nw3 O O\n\nx O S-SPAN\n\n");
  }
  SUBCASE("length mismatch") {
    std::ostringstream out;
    CHECK_THROWS_AS(export_conll({{words, encode_spans({}, 2), encode_spans({}, 3)}}, out), std::invalid_argument);
    CHECK(out.str().empty());
  }
}
