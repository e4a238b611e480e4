#include <doctest.h>

#include <cstdio>
#include <map>
#include <set>

#include "pseudoqe/corruptor.hpp"
#include "pseudoqe/error.hpp"

using namespace pseudoqe;

namespace {

CorruptionStats degenerate_stats(std::size_t count, std::size_t length,
                                 Severity severity) {
  CorruptionStats stats;
  stats.span_count = {{count}, {1.0}};
  stats.span_length = {{length}, {1.0}};
  stats.severity = {{severity}, {1.0}};
  return stats;
}

TokenizedText reference_of(std::size_t n) {
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < n; ++i) {
    tokens.push_back("w" + std::to_string(i));
  }
  return tokenize(detokenize(tokens));
}

}  // namespace

TEST_CASE("degenerate stats pin everything but the start") {
  const CorruptionStats stats = degenerate_stats(1, 2, Severity::Major);
  std::set<std::size_t> starts;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const CorruptionPlan plan = plan_corruption(5, stats, {0.0, 0.0}, rng);
    REQUIRE(plan.spans.size() == 1);
    CHECK(plan.spans[0].length == 2);
    CHECK(plan.spans[0].severity == Severity::Major);
    CHECK(plan.spans[0].edit == EditKind::Replace);
    CHECK(plan.spans[0].start_tok <= 3);
    starts.insert(plan.spans[0].start_tok);
  }
  CHECK(starts.size() == 4);  // all of {0,1,2,3} show up over 200 seeds
}

TEST_CASE("span count zero gives the identity corruption") {
  const CorruptionStats stats = degenerate_stats(0, 1, Severity::Minor);
  Rng rng(1);
  const CorruptionPlan plan = plan_corruption(6, stats, {0.15, 0.15}, rng);
  CHECK(plan.spans.empty());
  const TokenizedText reference = reference_of(6);
  const MaskedTranslation masked = apply_corruption(reference, plan, rng);
  CHECK(masked.tokens == reference.tokens);
  CHECK(masked.pseudo_mqm == 1.0);
  for (const Tag tag : masked.gold_tags) CHECK(tag == Tag::Ok);
}

TEST_CASE("infeasible second span is dropped after resampling") {
  // n=3 with forced length 2: one span exhausts the budget (2+2 >= 3).
  const CorruptionStats stats = degenerate_stats(2, 2, Severity::Minor);
  Rng rng(5);
  const CorruptionPlan plan = plan_corruption(3, stats, {0.0, 0.0}, rng);
  CHECK(plan.spans.size() == 1);
  CHECK(plan.spans[0].length == 2);
}

TEST_CASE("plan_corruption rejects an empty reference") {
  const CorruptionStats stats = default_stats();
  Rng rng(1);
  CHECK_THROWS_AS(
      static_cast<void>(plan_corruption(0, stats, {0.15, 0.15}, rng)),
      ValidationError);
}

TEST_CASE("three replace spans reproduce the worked tag row") {
  // 10-token reference, spans at 1 (minor), 4-7 (major), 9 (critical):
  // six BAD tags and an MQM score of -0.6.
  const TokenizedText reference = reference_of(10);
  CorruptionPlan plan;
  plan.reference_len = 10;
  plan.spans = {{1, 1, Severity::Minor, EditKind::Replace, 0},
                {4, 4, Severity::Major, EditKind::Replace, 0},
                {9, 1, Severity::Critical, EditKind::Replace, 0}};
  Rng rng(1);
  const MaskedTranslation masked = apply_corruption(reference, plan, rng);
  CHECK(tags_to_string(masked.gold_tags) ==
        "OK BAD OK OK BAD BAD BAD BAD OK BAD");
  CHECK(masked.pseudo_mqm == -0.6);
  REQUIRE(masked.mask_groups.size() == 3);
  CHECK(masked.mask_groups[1].positions ==
        std::vector<std::size_t>{4, 5, 6, 7});
  for (const auto& group : masked.mask_groups) {
    for (const std::size_t pos : group.positions) {
      CHECK(masked.tokens[pos] == kMaskToken);
    }
  }
}

TEST_CASE("full deletion tags the right neighbor") {
  const TokenizedText reference = reference_of(4);
  CorruptionPlan plan;
  plan.reference_len = 4;
  plan.spans = {{1, 2, Severity::Major, EditKind::Delete, 2}};
  Rng rng(1);
  const MaskedTranslation masked = apply_corruption(reference, plan, rng);
  REQUIRE(masked.tokens.size() == 2);
  CHECK(masked.tokens[0] == "w0");
  CHECK(masked.tokens[1] == "w3");
  CHECK(masked.gold_tags == WordTagSeq{Tag::Ok, Tag::Bad});
  CHECK(masked.mask_groups[0].positions.empty());
}

TEST_CASE("deletion at the sentence end falls back to the left neighbor") {
  const TokenizedText reference = reference_of(4);
  CorruptionPlan plan;
  plan.reference_len = 4;
  plan.spans = {{2, 2, Severity::Minor, EditKind::Delete, 2}};
  Rng rng(1);
  const MaskedTranslation masked = apply_corruption(reference, plan, rng);
  REQUIRE(masked.tokens.size() == 2);
  CHECK(masked.gold_tags == WordTagSeq{Tag::Ok, Tag::Bad});
}

TEST_CASE("partial deletion keeps masks for the surviving span tokens") {
  const TokenizedText reference = reference_of(5);
  CorruptionPlan plan;
  plan.reference_len = 5;
  plan.spans = {{1, 3, Severity::Major, EditKind::Delete, 1}};
  Rng rng(1);
  const MaskedTranslation masked = apply_corruption(reference, plan, rng);
  REQUIRE(masked.tokens.size() == 4);
  CHECK(masked.tokens[1] == kMaskToken);
  CHECK(masked.tokens[2] == kMaskToken);
  CHECK(masked.gold_tags == WordTagSeq{Tag::Ok, Tag::Bad, Tag::Bad, Tag::Ok});
  // survivors keep their reference tokens for the fixer
  REQUIRE(masked.mask_groups[0].original.size() == 2);
  CHECK(*masked.mask_groups[0].original[0] == "w2");
  CHECK(*masked.mask_groups[0].original[1] == "w3");
}

TEST_CASE("insertion widens the span with unaligned masks") {
  const TokenizedText reference = reference_of(3);
  CorruptionPlan plan;
  plan.reference_len = 3;
  plan.spans = {{1, 1, Severity::Minor, EditKind::Insert, 2}};
  Rng rng(9);
  const MaskedTranslation masked = apply_corruption(reference, plan, rng);
  REQUIRE(masked.tokens.size() == 5);
  const MaskGroup& group = masked.mask_groups[0];
  REQUIRE(group.positions.size() == 3);
  CHECK(group.positions == std::vector<std::size_t>{1, 2, 3});
  std::size_t aligned = 0;
  for (const auto& original : group.original) {
    if (original) {
      ++aligned;
      CHECK(*original == "w1");
    }
  }
  CHECK(aligned == 1);
  CHECK(masked.gold_tags ==
        WordTagSeq{Tag::Ok, Tag::Bad, Tag::Bad, Tag::Bad, Tag::Ok});
}

TEST_CASE("plan validation catches inconsistencies") {
  const TokenizedText reference = reference_of(5);
  Rng rng(1);
  CorruptionPlan plan;
  plan.reference_len = 4;
  CHECK_THROWS_AS(static_cast<void>(apply_corruption(reference, plan, rng)),
                  ValidationError);
  plan.reference_len = 5;
  plan.spans = {{0, 2, Severity::Minor, EditKind::Replace, 0},
                {1, 2, Severity::Minor, EditKind::Replace, 0}};
  CHECK_THROWS_AS(static_cast<void>(apply_corruption(reference, plan, rng)),
                  ValidationError);
  plan.spans = {{3, 4, Severity::Minor, EditKind::Replace, 0}};
  CHECK_THROWS_AS(static_cast<void>(apply_corruption(reference, plan, rng)),
                  ValidationError);
}

TEST_CASE("fuzzed corruptions keep the BAD-tag bookkeeping exact") {
  const CorruptionStats stats = default_stats();
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(24);
    const TokenizedText reference = reference_of(n);
    const CorruptionPlan plan = plan_corruption(n, stats, {0.2, 0.2}, rng);

    std::size_t total_len = 0;
    std::size_t eol = 0;
    for (const PlannedSpan& span : plan.spans) {
      CHECK(span.start_tok >= eol);
      eol = span.start_tok + span.length;
      total_len += span.length;
    }
    CHECK(total_len < n);

    const MaskedTranslation masked = apply_corruption(reference, plan, rng);
    REQUIRE(masked.gold_tags.size() == masked.tokens.size());

    // BAD positions are exactly masks plus omission markers; OK positions
    // are untouched reference tokens.
    std::set<std::size_t> mask_positions;
    for (const auto& group : masked.mask_groups) {
      for (const std::size_t pos : group.positions) {
        CHECK(mask_positions.insert(pos).second);  // no overlap between spans
        CHECK(masked.tokens[pos] == kMaskToken);
        CHECK(masked.gold_tags[pos] == Tag::Bad);
      }
    }
    for (std::size_t i = 0; i < masked.tokens.size(); ++i) {
      if (masked.gold_tags[i] == Tag::Ok) {
        CHECK(masked.tokens[i] != kMaskToken);
      } else if (mask_positions.count(i) == 0) {
        // omission marker on a surviving token
        CHECK(masked.tokens[i] != kMaskToken);
      }
    }
  }
}

TEST_CASE("edits disabled preserves the token count") {
  const CorruptionStats stats = default_stats();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(20);
    const TokenizedText reference = reference_of(n);
    const CorruptionPlan plan = plan_corruption(n, stats, {0.0, 0.0}, rng);
    const MaskedTranslation masked = apply_corruption(reference, plan, rng);
    CHECK(masked.tokens.size() == n);
  }
}

TEST_CASE("masked records round-trip through jsonl") {
  const std::string path = "pseudoqe_test_masked.jsonl";
  const TokenizedText reference = reference_of(6);
  CorruptionPlan plan;
  plan.reference_len = 6;
  plan.spans = {{1, 2, Severity::Major, EditKind::Insert, 1},
                {4, 1, Severity::Critical, EditKind::Replace, 0}};
  Rng rng(3);
  MaskedRecord record{"r1", "the source", apply_corruption(reference, plan, rng)};
  write_masked_jsonl({record}, path);
  const auto back = read_masked_jsonl(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == record.id);
  CHECK(back[0].source == record.source);
  CHECK(back[0].masked.tokens == record.masked.tokens);
  CHECK(back[0].masked.gold_tags == record.masked.gold_tags);
  CHECK(back[0].masked.pseudo_mqm == record.masked.pseudo_mqm);
  REQUIRE(back[0].masked.mask_groups.size() == 2);
  CHECK(back[0].masked.mask_groups[0].positions ==
        record.masked.mask_groups[0].positions);
  CHECK(back[0].masked.mask_groups[0].original ==
        record.masked.mask_groups[0].original);
  std::remove(path.c_str());
}
