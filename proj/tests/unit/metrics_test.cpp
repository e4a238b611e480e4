#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "oracles.hpp"
#include "pseudoqe/error.hpp"
#include "pseudoqe/metrics.hpp"

using namespace pseudoqe;

TEST_CASE("spearman on monotone and reversed data") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> up{10, 20, 30};
  const std::vector<double> down{3, 2, 1};
  CHECK(spearman(x, up) == doctest::Approx(1.0));
  CHECK(spearman(x, down) == doctest::Approx(-1.0));
}

TEST_CASE("spearman ties use average ranks") {
  const std::vector<double> pred{1, 2, 2, 3};
  const std::vector<double> gold{1, 3, 2, 4};
  CHECK(spearman(pred, gold) ==
        doctest::Approx(oracle::spearman(pred, gold)).epsilon(1e-12));
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  Rng rng(17);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<double> pred, gold, warped;
    const std::size_t n = 3 + rng.index(10);
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(rng.next_double() * 4.0 - 2.0);
      gold.push_back(rng.next_double());
    }
    bool varies = false;
    for (std::size_t i = 1; i < n; ++i) varies |= pred[i] != pred[0];
    if (!varies) continue;
    for (const double v : pred) warped.push_back(std::exp(2.0 * v) + 5.0);
    CHECK(spearman(pred, gold) ==
          doctest::Approx(spearman(warped, gold)).epsilon(1e-12));
  }
}

TEST_CASE("spearman error conditions") {
  CHECK_THROWS_WITH_AS(static_cast<void>(spearman(
                           std::vector<double>{1.0}, std::vector<double>{1.0})),
                       doctest::Contains("undefined"), ValidationError);
  CHECK_THROWS_WITH_AS(
      static_cast<void>(spearman(std::vector<double>{1.0, 1.0},
                                 std::vector<double>{1.0, 2.0})),
      doctest::Contains("undefined"), ValidationError);
  CHECK_THROWS_AS(static_cast<void>(spearman(std::vector<double>{1.0, 2.0},
                                             std::vector<double>{1.0})),
                  ValidationError);
}

TEST_CASE("mcc worked examples") {
  const WordTagSeq perfect_gold{Tag::Ok, Tag::Bad, Tag::Ok, Tag::Bad};
  CHECK(mcc({perfect_gold}, {perfect_gold}) == doctest::Approx(1.0));

  // TP=TN=FP=FN=1
  const WordTagSeq pred{Tag::Ok, Tag::Bad, Tag::Ok, Tag::Bad};
  const WordTagSeq gold{Tag::Ok, Tag::Bad, Tag::Bad, Tag::Ok};
  CHECK(mcc({pred}, {gold}) == 0.0);

  // all-OK prediction hits the zero-denominator convention
  const WordTagSeq all_ok{Tag::Ok, Tag::Ok, Tag::Ok, Tag::Ok};
  CHECK(mcc({all_ok}, {gold}) == 0.0);
}

TEST_CASE("mcc is symmetric under class relabeling") {
  Rng rng(23);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<WordTagSeq> pred(1), gold(1);
    const std::size_t n = 2 + rng.index(12);
    for (std::size_t i = 0; i < n; ++i) {
      pred[0].push_back(rng.next_double() < 0.5 ? Tag::Ok : Tag::Bad);
      gold[0].push_back(rng.next_double() < 0.5 ? Tag::Ok : Tag::Bad);
    }
    auto flip = [](const std::vector<WordTagSeq>& tags) {
      std::vector<WordTagSeq> out(tags.size());
      for (std::size_t s = 0; s < tags.size(); ++s) {
        for (const Tag t : tags[s]) {
          out[s].push_back(t == Tag::Ok ? Tag::Bad : Tag::Ok);
        }
      }
      return out;
    };
    CHECK(mcc(pred, gold) ==
          doctest::Approx(mcc(flip(pred), flip(gold))).epsilon(1e-12));
  }
}

TEST_CASE("span_f1 worked examples") {
  const std::vector<ErrorSpan> gold_spans{{10, 15, Severity::Major},
                                          {55, 70, Severity::Minor}};
  CHECK(span_f1({gold_spans}, {gold_spans}, SpanMatch::Strict) == 1.0);
  CHECK(span_f1({gold_spans}, {gold_spans}, SpanMatch::Lenient) == 1.0);

  const std::vector<ErrorSpan> pred{{10, 15, Severity::Minor}};
  const std::vector<ErrorSpan> gold{{10, 15, Severity::Major}};
  CHECK(span_f1({pred}, {gold}, SpanMatch::Strict) == 0.0);
  CHECK(span_f1({pred}, {gold}, SpanMatch::Lenient) == doctest::Approx(0.5));

  CHECK(span_f1({{}}, {gold}, SpanMatch::Lenient) == 0.0);
  CHECK(span_f1({pred}, {{}}, SpanMatch::Lenient) == 0.0);
  CHECK(span_f1({{}}, {{}}, SpanMatch::Lenient) == 1.0);
}

TEST_CASE("span_f1 rejects overlapping predictions") {
  const std::vector<ErrorSpan> overlapping{{0, 5, Severity::Minor},
                                           {3, 8, Severity::Major}};
  CHECK_THROWS_AS(
      static_cast<void>(span_f1({overlapping}, {{}}, SpanMatch::Strict)),
      ValidationError);
}

TEST_CASE("metrics agree with brute-force oracles on fuzzed instances") {
  Rng rng(2025);
  int spearman_checked = 0;
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t samples = 1 + rng.index(10);

    // sentence scores
    std::vector<double> pred_scores, gold_scores;
    for (std::size_t s = 0; s < samples; ++s) {
      pred_scores.push_back(
          std::round(rng.next_double() * 8.0) / 8.0);  // force ties sometimes
      gold_scores.push_back(std::round(rng.next_double() * 8.0) / 8.0);
    }
    const bool pred_varies =
        std::count(pred_scores.begin(), pred_scores.end(), pred_scores[0]) !=
        static_cast<long>(samples);
    const bool gold_varies =
        std::count(gold_scores.begin(), gold_scores.end(), gold_scores[0]) !=
        static_cast<long>(samples);
    if (samples >= 2 && pred_varies && gold_varies) {
      CHECK(spearman(pred_scores, gold_scores) ==
            doctest::Approx(oracle::spearman(pred_scores, gold_scores))
                .epsilon(1e-9));
      ++spearman_checked;
    }

    // word tags
    std::vector<WordTagSeq> pred_tags(samples), gold_tags(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t tokens = 1 + rng.index(12);
      for (std::size_t t = 0; t < tokens; ++t) {
        pred_tags[s].push_back(rng.next_double() < 0.4 ? Tag::Bad : Tag::Ok);
        gold_tags[s].push_back(rng.next_double() < 0.4 ? Tag::Bad : Tag::Ok);
      }
    }
    CHECK(mcc(pred_tags, gold_tags) ==
          doctest::Approx(oracle::mcc(pred_tags, gold_tags)).epsilon(1e-9));

    // spans over a virtual 30-character text
    std::vector<std::vector<ErrorSpan>> pred_spans(samples),
        gold_spans(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      pred_spans[s] = gen::random_spans(rng, 30, 3);
      gold_spans[s] = gen::random_spans(rng, 30, 3);
    }
    const double strict = span_f1(pred_spans, gold_spans, SpanMatch::Strict);
    const double lenient = span_f1(pred_spans, gold_spans, SpanMatch::Lenient);
    CHECK(strict ==
          doctest::Approx(oracle::span_f1(pred_spans, gold_spans, false))
              .epsilon(1e-9));
    CHECK(lenient ==
          doctest::Approx(oracle::span_f1(pred_spans, gold_spans, true))
              .epsilon(1e-9));
    CHECK(strict <= lenient + 1e-12);
  }
  CHECK(spearman_checked > 50);
}
