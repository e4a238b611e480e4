#include "pseudoqe/fixer.hpp"

#include <algorithm>
#include <limits>

#include "pseudoqe/error.hpp"

namespace pseudoqe {

std::size_t SeverityKMap::k_for(Severity severity) const {
  switch (severity) {
    case Severity::Minor:
      return minor;
    case Severity::Major:
      return major;
    case Severity::Critical:
      return critical;
  }
  throw ValidationError("unknown severity value");
}

void SeverityKMap::validate() const {
  if (minor < 2 || major < 2 || critical < 2) {
    throw ValidationError("severity k-map: every k must be at least 2");
  }
}

namespace {

struct MaskSlot {
  std::size_t position;
  Severity severity;
  const std::optional<std::string>* reference;
};

// Uniform draw among candidates that differ from the reference token.
// Returns nullopt when exclusion leaves nothing.
std::optional<std::string> pick_candidate(
    const CandidateSet& candidates, const std::optional<std::string>& reference,
    Rng& rng) {
  std::vector<const std::string*> pool;
  pool.reserve(candidates.tokens.size());
  for (const std::string& tok : candidates.tokens) {
    if (!reference || tok != *reference) pool.push_back(&tok);
  }
  if (pool.empty()) return std::nullopt;
  return *pool[rng.index(pool.size())];
}

}  // namespace

QESample fill_masks(const MaskedRecord& record, Sampler& sampler,
                    const SeverityKMap& kmap, FillMode mode, Rng& rng) {
  kmap.validate();
  const MaskedTranslation& masked = record.masked;

  std::vector<MaskSlot> slots;
  for (const MaskGroup& group : masked.mask_groups) {
    for (std::size_t i = 0; i < group.positions.size(); ++i) {
      slots.push_back({group.positions[i], group.severity, &group.original[i]});
    }
  }
  std::sort(slots.begin(), slots.end(),
            [](const MaskSlot& a, const MaskSlot& b) {
              return a.position < b.position;
            });

  std::vector<std::string> filled = masked.tokens;
  for (const MaskSlot& slot : slots) {
    if (slot.position >= filled.size() ||
        filled[slot.position] != kMaskToken) {
      throw ValidationError("fill_masks: record '" + record.id +
                            "': mask position " +
                            std::to_string(slot.position) + " is not a mask");
    }
    FillRequest request;
    request.source = record.source;
    // LeftToRight sees earlier fills; Parallel always sees the masked input.
    request.context = mode == FillMode::LeftToRight ? filled : masked.tokens;
    request.position = slot.position;
    request.mode = mode;

    const std::size_t k = kmap.k_for(slot.severity);
    CandidateSet candidates = sampler.top_k(request, k);
    std::optional<std::string> choice =
        pick_candidate(candidates, *slot.reference, rng);
    if (!choice) {
      // Whole-vocabulary fallback.
      candidates = sampler.top_k(
          request, static_cast<std::size_t>(
                       std::numeric_limits<std::int32_t>::max()));
      choice = pick_candidate(candidates, *slot.reference, rng);
      if (!choice) {
        throw ValidationError("fill_masks: record '" + record.id +
                              "': vocabulary has no token other than the "
                              "reference");
      }
    }
    filled[slot.position] = *choice;
  }

  QESample sample;
  sample.id = record.id;
  sample.source = record.source;
  sample.translation = tokenize(detokenize(filled));
  if (sample.translation.size() != masked.tokens.size()) {
    throw ValidationError("fill_masks: record '" + record.id +
                          "': filled tokens retokenize to a different count");
  }
  sample.tags = masked.gold_tags;
  sample.mqm = masked.pseudo_mqm;
  return sample;
}

QESample fill_masks(const MaskedRecord& record, const CorruptionPlan& plan,
                    Sampler& sampler, const SeverityKMap& kmap, FillMode mode,
                    Rng& rng) {
  const MaskedTranslation& masked = record.masked;
  if (masked.mask_groups.size() != plan.spans.size()) {
    throw ValidationError("fill_masks: record '" + record.id +
                          "': masked translation does not match plan (" +
                          std::to_string(masked.mask_groups.size()) +
                          " groups for " + std::to_string(plan.spans.size()) +
                          " spans)");
  }
  for (std::size_t i = 0; i < plan.spans.size(); ++i) {
    const MaskGroup& group = masked.mask_groups[i];
    const PlannedSpan& span = plan.spans[i];
    if (group.severity != span.severity) {
      throw ValidationError("fill_masks: record '" + record.id +
                            "': group severity does not match plan span " +
                            std::to_string(i));
    }
    for (const std::size_t pos : group.positions) {
      if (pos >= masked.tokens.size() || masked.tokens[pos] != kMaskToken) {
        throw ValidationError("fill_masks: record '" + record.id +
                              "': plan span " + std::to_string(i) +
                              " points at a non-mask position");
      }
    }
  }
  return fill_masks(record, sampler, kmap, mode, rng);
}

}  // namespace pseudoqe
