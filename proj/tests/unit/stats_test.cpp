#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <map>

#include "pseudoqe/corpus.hpp"
#include "pseudoqe/error.hpp"
#include "pseudoqe/rng.hpp"
#include "pseudoqe/stats.hpp"

using namespace pseudoqe;

namespace {

QESample sample_with_spans(const std::string& id,
                           std::vector<ErrorSpan> spans) {
  QESample sample;
  sample.id = id;
  sample.source = "src";
  sample.translation = tokenize("one two three four five six seven eight");
  sample.spans = std::move(spans);
  return sample;
}

}  // namespace

TEST_CASE("rng streams are deterministic and record-keyed") {
  Rng a(1), b(1), c(2);
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    CHECK(va != c.next_u64());
  }
  CHECK(stable_hash(1, "rec-1") == stable_hash(1, "rec-1"));
  CHECK(stable_hash(1, "rec-1") != stable_hash(1, "rec-2"));
  CHECK(stable_hash(1, "rec-1") != stable_hash(2, "rec-1"));

  Rng r(99);
  for (int i = 0; i < 1000; ++i) {
    const double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
    const auto v = r.uniform_int(3, 7);
    CHECK(v >= 3);
    CHECK(v <= 7);
  }
}

TEST_CASE("estimate_stats counts spans, lengths and severities") {
  const std::vector<QESample> samples = {
      sample_with_spans("a", {{0, 3, Severity::Major}}),
      sample_with_spans("b", {{0, 3, Severity::Major},
                              {4, 7, Severity::Major},
                              {8, 13, Severity::Major}}),
  };
  const CorruptionStats stats = estimate_stats(samples);
  REQUIRE(stats.span_count.support == std::vector<std::size_t>{1, 3});
  CHECK(stats.span_count.probs[0] == 0.5);
  CHECK(stats.span_count.probs[1] == 0.5);
  REQUIRE(stats.severity.support == std::vector<Severity>{Severity::Major});
  CHECK(stats.severity.probs[0] == 1.0);
}

TEST_CASE("estimate_stats error paths") {
  CHECK_THROWS_AS(estimate_stats({}), ValidationError);
  CHECK_THROWS_WITH_AS(
      static_cast<void>(estimate_stats({sample_with_spans("a", {}),
                                        sample_with_spans("b", {})})),
      doctest::Contains("no spans"), ValidationError);
  QESample missing = sample_with_spans("c", {});
  missing.spans.reset();
  CHECK_THROWS_AS(static_cast<void>(estimate_stats({missing})),
                  ValidationError);
}

TEST_CASE("span lengths are measured in overlapped tokens") {
  // "one two three ..." -- a span across "one two" covers 2 tokens.
  const std::vector<QESample> samples = {
      sample_with_spans("a", {{0, 7, Severity::Minor}})};
  const CorruptionStats stats = estimate_stats(samples);
  REQUIRE(stats.span_length.support == std::vector<std::size_t>{2});
  CHECK(stats.span_length.probs[0] == 1.0);
}

TEST_CASE("categorical sampling") {
  Rng rng(1);
  const Categorical<std::size_t> degenerate{{42}, {1.0}};
  for (int i = 0; i < 50; ++i) CHECK(degenerate.sample(rng) == 42);

  const Categorical<std::size_t> fair{{0, 1}, {0.5, 0.5}};
  std::size_t ones = 0;
  for (int i = 0; i < 10000; ++i) ones += fair.sample(rng);
  const double freq = static_cast<double>(ones) / 10000.0;
  CHECK(freq == doctest::Approx(0.5).epsilon(0.04));  // 0.5 +- 0.02 absolute

  Rng r1(7), r2(7);
  for (int i = 0; i < 200; ++i) CHECK(fair.sample(r1) == fair.sample(r2));
}

TEST_CASE("categorical validation") {
  Categorical<std::size_t> bad_sum{{1, 2}, {0.5, 0.6}};
  CHECK_THROWS_AS(bad_sum.validate("d"), ValidationError);
  Categorical<std::size_t> dup{{1, 1}, {0.5, 0.5}};
  CHECK_THROWS_AS(dup.validate("d"), ValidationError);
  Categorical<std::size_t> negative{{1, 2}, {1.5, -0.5}};
  CHECK_THROWS_AS(negative.validate("d"), ValidationError);
}

TEST_CASE("estimation then sampling reproduces frequencies") {
  std::vector<QESample> samples;
  for (int i = 0; i < 10; ++i) {
    samples.push_back(sample_with_spans(
        "m" + std::to_string(i),
        {{0, 3, i < 7 ? Severity::Minor : Severity::Critical}}));
  }
  const CorruptionStats stats = estimate_stats(samples);
  Rng rng(3);
  std::map<Severity, std::size_t> freq;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) freq[stats.severity.sample(rng)] += 1;
  CHECK(static_cast<double>(freq[Severity::Minor]) / draws ==
        doctest::Approx(0.7).epsilon(0.015));
  CHECK(static_cast<double>(freq[Severity::Critical]) / draws ==
        doctest::Approx(0.3).epsilon(0.04));
}

TEST_CASE("stats file round-trip is lossless") {
  const std::string path = "pseudoqe_test_stats.json";
  std::vector<QESample> samples;
  for (int i = 0; i < 3; ++i) {
    samples.push_back(sample_with_spans(
        "s" + std::to_string(i), {{0, 3, Severity::Minor}}));
  }
  samples.push_back(sample_with_spans("s3", {}));
  const CorruptionStats stats = estimate_stats(samples);  // probs like 1/4, 3/4
  write_stats(stats, path);
  const CorruptionStats back = read_stats(path);
  CHECK(back.span_count.support == stats.span_count.support);
  CHECK(back.span_count.probs == stats.span_count.probs);
  CHECK(back.span_length.probs == stats.span_length.probs);
  CHECK(back.severity.probs == stats.severity.probs);
  std::remove(path.c_str());

  CHECK_THROWS_WITH_AS(static_cast<void>(read_stats("missing-stats.json")),
                       doctest::Contains("missing-stats.json"),
                       ValidationError);
}

TEST_CASE("default stats are valid and labeled severities") {
  const CorruptionStats stats = default_stats();
  CHECK(stats.span_count.support.front() == 0);
  CHECK(stats.span_count.support.back() == 4);
  CHECK(stats.span_length.support.front() == 1);
  CHECK(stats.span_length.support.back() == 6);
  REQUIRE(stats.severity.probs.size() == 3);
  CHECK(stats.severity.probs[0] == 0.45);
  CHECK(stats.severity.probs[1] == 0.50);
  CHECK(stats.severity.probs[2] == 0.05);
}
