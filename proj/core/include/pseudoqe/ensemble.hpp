#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pseudoqe/corpus.hpp"
#include "pseudoqe/metrics.hpp"
#include "pseudoqe/predictions.hpp"

namespace pseudoqe {

// z = (x - mean) / population std over one system's outputs on the evaluated
// set. A zero-variance system contributes 0 for every sample.
std::vector<double> zscores(std::span<const double> values);

// Per-sample mean of per-system z-scores. Systems must agree in length.
std::vector<double> zscore_ensemble(
    const std::vector<std::vector<double>>& per_system_scores);

// Element-wise mean of OK probabilities across systems; token counts must
// align per sample.
std::vector<std::vector<double>> average_ok_probs(
    const std::vector<std::vector<std::vector<double>>>& per_system_probs);

// OK iff p > e_bad, BAD iff p <= e_bad (the boundary is BAD).
WordTagSeq tag_by_threshold(std::span<const double> ok_probs, double e_bad);

// Three-way severity split: OK if p > e_minor, Minor if e_major < p <=
// e_minor, Major if p <= e_major. Requires e_major <= e_minor; the predicted
// label set has no Critical. nullopt means OK.
std::vector<std::optional<Severity>> fine_tag(std::span<const double> ok_probs,
                                              double e_minor, double e_major);

enum class MergeRule : std::uint8_t { Worst = 0, Majority = 1 };

MergeRule merge_rule_from_name(std::string_view name);

// Maximal runs of consecutive non-OK tokens become one span from the first
// member's start offset to the last member's end offset. Worst takes the
// gravest member severity; Majority the most frequent one, ties resolved to
// the worse.
std::vector<ErrorSpan> assemble_spans(
    const std::vector<std::optional<Severity>>& token_severities,
    const TokenizedText& translation, MergeRule rule = MergeRule::Worst);

struct Thresholds {
  double e_bad = 0.5;
  double e_minor = 0.5;
  double e_major = 0.5;
};

// Grid points 0, step, 2*step, ..., 1.
std::vector<double> threshold_grid(double step);

// argmax of token MCC over the grid; ties take the smaller threshold.
struct BadThresholdSearch {
  double e_bad;
  double mcc;
};
BadThresholdSearch grid_search_e_bad(
    const std::vector<std::vector<double>>& ok_probs,
    const std::vector<WordTagSeq>& gold_tags, std::span<const double> grid);

// argmax of span F1 over all grid pairs with e_major <= e_minor; ties take
// the lexicographically smaller (e_minor, e_major).
struct FineThresholdSearch {
  double e_minor;
  double e_major;
  double f1;
};
FineThresholdSearch grid_search_fine(
    const std::vector<std::vector<double>>& ok_probs,
    const std::vector<TokenizedText>& translations,
    const std::vector<std::vector<ErrorSpan>>& gold_spans,
    std::span<const double> grid, SpanMatch mode, MergeRule rule);

// Span submission file: one line per sample, id then start:end:severity
// entries, tab-separated.
struct SpanRecord {
  std::string id;
  std::vector<ErrorSpan> spans;
};
std::vector<SpanRecord> read_span_file(const std::string& path);
void write_span_file(const std::vector<SpanRecord>& records,
                     const std::string& path);

}  // namespace pseudoqe
