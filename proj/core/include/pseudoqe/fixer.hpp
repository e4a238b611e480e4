#pragma once

#include <cstddef>

#include "pseudoqe/corpus.hpp"
#include "pseudoqe/corruptor.hpp"
#include "pseudoqe/rng.hpp"
#include "pseudoqe/sampler.hpp"

namespace pseudoqe {

// Candidate pool size per severity: graver errors sample from deeper into
// the distribution. Every k must be at least 2, otherwise excluding the
// reference token could leave no candidate at all for a peaked sampler.
struct SeverityKMap {
  std::size_t minor = 2;
  std::size_t major = 10;
  std::size_t critical = 100;

  std::size_t k_for(Severity severity) const;
  void validate() const;
};

// Fills every mask of a corrupted record by sampling uniformly among the
// top-k candidates for the span's severity, always excluding the reference
// token the mask replaced. LeftToRight fills ascending positions with
// earlier fills visible; Parallel keeps the original masked context for every
// request. If exclusion empties the pool, a uniform vocabulary token other
// than the reference is used instead (the request is reissued with an
// effectively unbounded k); a vocabulary of size 1 is an error.
//
// The result carries the record's gold tags and pseudo MQM score, with
// character offsets recomputed from the filled token sequence.
QESample fill_masks(const MaskedRecord& record, Sampler& sampler,
                    const SeverityKMap& kmap, FillMode mode, Rng& rng);

// Same, but first checks the masked translation against the plan that
// produced it (group count, severities, mask positions).
QESample fill_masks(const MaskedRecord& record, const CorruptionPlan& plan,
                    Sampler& sampler, const SeverityKMap& kmap, FillMode mode,
                    Rng& rng);

}  // namespace pseudoqe
