#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pseudoqe/corpus.hpp"

namespace pseudoqe {

// Pooled token-level confusion counts with BAD as the positive class.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
};

// Spearman rank correlation with average ranks for ties. Throws
// ValidationError for fewer than two points or zero rank variance
// ("undefined correlation").
double spearman(std::span<const double> pred, std::span<const double> gold);

// Confusion counts pooled over all tokens of all sentences. Shapes must
// align.
ConfusionCounts confusion(const std::vector<WordTagSeq>& pred,
                          const std::vector<WordTagSeq>& gold);

// Matthews correlation coefficient; 0 when any denominator factor is zero.
double mcc(const ConfusionCounts& counts);
double mcc(const std::vector<WordTagSeq>& pred,
           const std::vector<WordTagSeq>& gold);

// Character-level span F1. Strict credits a predicted character only when a
// gold error character at the same position has the same severity; Lenient
// gives 0.5 credit for a position match with a severity mismatch.
enum class SpanMatch : std::uint8_t { Strict = 0, Lenient = 1 };

SpanMatch span_match_from_name(std::string_view name);
std::string_view span_match_name(SpanMatch mode);

// Pooled over samples: precision = score / predicted error characters,
// recall = score / gold error characters, F1 their harmonic mean. 1 when
// both sides are empty, 0 when exactly one is. Spans inside one sample must
// not overlap.
double span_f1(const std::vector<std::vector<ErrorSpan>>& pred,
               const std::vector<std::vector<ErrorSpan>>& gold,
               SpanMatch mode);

}  // namespace pseudoqe
