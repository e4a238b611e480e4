#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "generators.hpp"
#include "pseudoqe/corpus.hpp"
#include "pseudoqe/error.hpp"
#include "pseudoqe/utf8.hpp"

using namespace pseudoqe;

namespace {

// The running example sentence used across the suites: two error spans,
// "zieht" at characters 10:15 and "Graft-Vorwürfen" at 55:70.
const char* kExampleTranslation =
    "Regierung zieht 15 weitere leitende Steuerbeamte wegen Graft-Vorwürfen "
    "zurück";

std::string temp_path(const char* name) {
  return std::string("pseudoqe_test_") + name;
}

}  // namespace

TEST_CASE("tokenize computes character offsets") {
  const TokenizedText t = tokenize("Regierung zieht 15");
  CHECK(t.tokens == std::vector<std::string>{"Regierung", "zieht", "15"});
  REQUIRE(t.offsets.size() == 3);
  CHECK(t.offsets[0] == std::pair<std::size_t, std::size_t>{0, 9});
  CHECK(t.offsets[1] == std::pair<std::size_t, std::size_t>{10, 15});
  CHECK(t.offsets[2] == std::pair<std::size_t, std::size_t>{16, 18});
}

TEST_CASE("tokenize offsets count scalars, not bytes") {
  const TokenizedText t = tokenize(kExampleTranslation);
  REQUIRE(t.tokens.size() == 9);
  CHECK(t.tokens[1] == "zieht");
  CHECK(t.offsets[1] == std::pair<std::size_t, std::size_t>{10, 15});
  CHECK(t.tokens[7] == "Graft-Vorwürfen");
  CHECK(t.offsets[7] == std::pair<std::size_t, std::size_t>{55, 70});
  CHECK(utf8_substr(t.raw, 10, 15) == "zieht");
  CHECK(utf8_substr(t.raw, 55, 70) == "Graft-Vorwürfen");
}

TEST_CASE("tokenize edge cases") {
  CHECK(tokenize("").tokens.empty());
  CHECK(tokenize("   ").tokens.empty());
  const TokenizedText t = tokenize("a  b");
  CHECK(t.tokens == std::vector<std::string>{"a", "b"});
  CHECK(t.offsets[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(t.offsets[1] == std::pair<std::size_t, std::size_t>{3, 4});
}

TEST_CASE("tokenize offsets always slice back to the token") {
  Rng rng(2024);
  for (int iter = 0; iter < 300; ++iter) {
    const std::string text = gen::random_unicode_text(rng, 40);
    const TokenizedText t = tokenize(text);
    REQUIRE(t.tokens.size() == t.offsets.size());
    std::size_t previous_end = 0;
    for (std::size_t i = 0; i < t.tokens.size(); ++i) {
      const auto [begin, end] = t.offsets[i];
      CHECK(begin < end);
      if (i > 0) CHECK(begin > previous_end);
      CHECK(utf8_substr(t.raw, begin, end) == t.tokens[i]);
      previous_end = end;
    }
    CHECK(detokenize(t.tokens) == detokenize(tokenize(detokenize(t.tokens)).tokens));
  }
}

TEST_CASE("mqm_score worked examples") {
  CHECK(mqm_score(1, 1, 0, 9) == doctest::Approx(0.3333).epsilon(1e-4));
  CHECK(mqm_score(0, 0, 0, 1) == 1.0);
  CHECK(mqm_score(0, 0, 0, 17) == 1.0);
  CHECK(mqm_score(1, 1, 1, 10) == -0.6);
  CHECK_THROWS_AS(mqm_score(0, 0, 0, 0), ValidationError);
}

TEST_CASE("mqm_score monotonicity") {
  Rng rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng.index(30);
    const std::size_t a = rng.index(4), b = rng.index(4), c = rng.index(4);
    const double base = mqm_score(a, b, c, n);
    CHECK(mqm_score(a + 1, b, c, n) < base);
    CHECK(mqm_score(a, b + 1, c, n) < base);
    CHECK(mqm_score(a, b, c + 1, n) < base);
    if (a + b + c > 0) {
      CHECK(mqm_score(a, b, c, n + 1) > base);
    }
  }
}

TEST_CASE("severity penalties and order") {
  CHECK(penalty(Severity::Minor) == 1);
  CHECK(penalty(Severity::Major) == 5);
  CHECK(penalty(Severity::Critical) == 10);
  CHECK(worse_than(Severity::Critical, Severity::Major));
  CHECK(worse_than(Severity::Major, Severity::Minor));
  CHECK_FALSE(worse_than(Severity::Minor, Severity::Minor));
}

TEST_CASE("tags_from_spans reproduces the example annotation") {
  const TokenizedText t = tokenize(kExampleTranslation);
  const std::vector<ErrorSpan> spans = {{10, 15, Severity::Major},
                                        {55, 70, Severity::Minor}};
  CHECK(tags_to_string(tags_from_spans(t, spans)) ==
        "OK BAD OK OK OK OK OK BAD OK");
}

TEST_CASE("tags_from_spans edge cases") {
  const TokenizedText t = tokenize("x y");
  CHECK(tags_from_spans(t, {}) == WordTagSeq{Tag::Ok, Tag::Ok});
  CHECK(tags_from_spans(t, {{2, 3, Severity::Minor}}) ==
        WordTagSeq{Tag::Ok, Tag::Bad});
  // mid-token boundary marks the whole token
  CHECK(tags_from_spans(tokenize("abc def"), {{1, 2, Severity::Minor}}) ==
        WordTagSeq{Tag::Bad, Tag::Ok});
  CHECK_THROWS_AS(tags_from_spans(t, {{2, 9, Severity::Minor}}),
                  ValidationError);
  CHECK_THROWS_AS(
      tags_from_spans(t, {{0, 2, Severity::Minor}, {1, 3, Severity::Major}}),
      ValidationError);
}

TEST_CASE("qe jsonl round-trips the example record") {
  const std::string path = temp_path("roundtrip.jsonl");
  QESample sample;
  sample.id = "example-1";
  sample.source = "Government Retires 15 More Senior Tax Officials On Graft "
                  "Charges";
  sample.translation = tokenize(kExampleTranslation);
  sample.spans = {{10, 15, Severity::Major}, {55, 70, Severity::Minor}};
  sample.tags = tags_from_spans(sample.translation, *sample.spans);
  sample.mqm = mqm_score(1, 1, 0, sample.translation.size());

  write_qe_jsonl({sample}, path);
  const std::vector<QESample> back = read_qe_jsonl(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == sample.id);
  CHECK(back[0].source == sample.source);
  CHECK(back[0].translation.raw == sample.translation.raw);
  CHECK(back[0].translation.offsets == sample.translation.offsets);
  CHECK(*back[0].tags == *sample.tags);
  CHECK(*back[0].mqm == *sample.mqm);
  CHECK(*back[0].spans == *sample.spans);
  std::remove(path.c_str());
}

TEST_CASE("qe jsonl error reporting") {
  const std::string path = temp_path("errors.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"a","src":"s","mt":"x y"})" << '\n';
    out << "not json\n";
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(read_qe_jsonl(path)),
                       doctest::Contains(":2"), ValidationError);
  {
    std::ofstream out(path);
    // tag flipped against the span annotation
    out << R"({"id":"a","src":"s","mt":"x y","tags":"OK OK","spans":["0:1:minor"]})"
        << '\n';
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(read_qe_jsonl(path)),
                       doctest::Contains("inconsistent"), ValidationError);
  {
    std::ofstream out(path);
    out << R"({"id":"a","src":"s","mt":"x y","tags":"OK"})" << '\n';
  }
  CHECK_THROWS_AS(static_cast<void>(read_qe_jsonl(path)), ValidationError);
  {
    std::ofstream out(path);
  }
  CHECK(read_qe_jsonl(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("parallel tsv") {
  const std::string path = temp_path("pairs.tsv");
  write_parallel_tsv({{"hello world", "hallo welt"}, {"a", "b"}}, path);
  const auto pairs = read_parallel_tsv(path);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].source == "hello world");
  CHECK(pairs[0].target == "hallo welt");
  {
    std::ofstream out(path);
    out << "no tab here\n";
  }
  CHECK_THROWS_WITH_AS(static_cast<void>(read_parallel_tsv(path)),
                       doctest::Contains(":1"), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("severity names round-trip") {
  for (const Severity s :
       {Severity::Minor, Severity::Major, Severity::Critical}) {
    CHECK(severity_from_name(severity_name(s)) == s);
  }
  CHECK_THROWS_AS(severity_from_name("fatal"), ValidationError);
  const ErrorSpan span{55, 70, Severity::Minor};
  CHECK(span_to_string(span) == "55:70:minor");
  CHECK(span_from_string("55:70:minor") == span);
}
