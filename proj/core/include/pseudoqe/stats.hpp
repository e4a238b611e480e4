#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pseudoqe/corpus.hpp"
#include "pseudoqe/rng.hpp"

namespace pseudoqe {

// Explicit categorical table. The corruption procedure uses raw empirical
// distributions, no parametric fit.
template <typename T>
struct Categorical {
  std::vector<T> support;
  std::vector<double> probs;

  bool empty() const { return support.empty(); }

  // support/probs same length, probs >= 0 summing to 1 within 1e-9, support
  // values distinct. Throws ValidationError otherwise.
  void validate(const std::string& name) const;

  // CDF inversion on one uniform draw.
  const T& sample(Rng& rng) const;
};

// The three distributions behind pseudo-data sampling: spans per sentence,
// span length in tokens, severity per span.
struct CorruptionStats {
  Categorical<std::size_t> span_count;
  Categorical<std::size_t> span_length;
  Categorical<Severity> severity;

  void validate() const;
};

// Empirical distributions over an annotated dataset. Every sample must carry
// spans (an empty list counts as zero spans). Span lengths are measured in
// overlapped tokens. Errors: empty input, or no spans at all anywhere
// (length/severity would be empty).
CorruptionStats estimate_stats(const std::vector<QESample>& samples);

// Synthetic defaults shipped with the toolkit: span count over 0..4, lengths
// 1..6, severities minor/major/critical at 0.45/0.50/0.05. These are stand-in
// values for users without annotated data, not estimates of any real corpus.
CorruptionStats default_stats();

// Stats file: one JSON document with the three named distributions.
// Round-trips losslessly.
CorruptionStats read_stats(const std::string& path);
void write_stats(const CorruptionStats& stats, const std::string& path);

}  // namespace pseudoqe
