#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pseudoqe/corpus.hpp"
#include "pseudoqe/rng.hpp"
#include "pseudoqe/stats.hpp"

namespace pseudoqe {

// Reserved mask symbol written into corrupted translations.
inline constexpr std::string_view kMaskToken = "<mask>";

enum class EditKind : std::uint8_t { Replace = 0, Insert = 1, Delete = 2 };

// One sampled error span over the reference, in token units. edit_count is
// the number of extra masks for Insert and of removed tokens for Delete;
// zero for Replace.
struct PlannedSpan {
  std::size_t start_tok;
  std::size_t length;
  Severity severity;
  EditKind edit = EditKind::Replace;
  std::size_t edit_count = 0;
};

struct CorruptionPlan {
  std::vector<PlannedSpan> spans;
  std::size_t reference_len = 0;
};

struct EditProbs {
  double insert = 0.15;
  double remove = 0.15;
};

// Samples a corruption plan for an n-token reference:
//   1. span count t, capped so a placement exists (t <= n-1);
//   2. span lengths one by one, keeping the total below n; a length is
//      resampled up to 20 times before the remaining spans are dropped;
//   3. start index of span i uniform in [EOL_i, n - sum of remaining lengths];
//   4. severity per span;
//   5. edit per span: Insert with probability insert, Delete with remove,
//      Replace otherwise. Insert adds uniform_int(1, length) masks inside the
//      span; Delete removes uniform_int(1, length-1) tokens from its start.
//      A length-1 span cannot lose a token and falls back to Replace.
// Spans never overlap; adjacent spans are allowed.
CorruptionPlan plan_corruption(std::size_t n, const CorruptionStats& stats,
                               EditProbs edit_probs, Rng& rng);

// Masks of one span in the corrupted output. positions index the output
// token list; original holds the replaced reference token, or nullopt for an
// inserted mask that replaces nothing.
struct MaskGroup {
  std::vector<std::size_t> positions;
  Severity severity;
  std::vector<std::optional<std::string>> original;
};

struct MaskedTranslation {
  std::vector<std::string> tokens;
  std::vector<MaskGroup> mask_groups;  // one per plan span, in span order
  WordTagSeq gold_tags;
  double pseudo_mqm = 1.0;
};

// Applies the plan to the reference. Replace turns span tokens into masks;
// Insert additionally inserts masks at uniform slots inside the span; Delete
// drops tokens from the span start and tags the surviving token right of the
// deletion BAD (the token to its left when the deletion ends the sentence).
// Masks, inserted masks and omission markers are exactly the BAD positions.
// pseudo_mqm applies the MQM formula to the sampled severities with the
// post-edit token count. Plans that fully delete a span (possible when built
// by hand) are accepted; its mask group is then empty.
MaskedTranslation apply_corruption(const TokenizedText& reference,
                                   const CorruptionPlan& plan, Rng& rng);

// Corrupt-stage record: a masked translation plus the identifiers the fixer
// needs downstream.
struct MaskedRecord {
  std::string id;
  std::string source;
  MaskedTranslation masked;
};

// Line-delimited JSON with fields id, src, mt, tags, score, masks.
std::vector<MaskedRecord> read_masked_jsonl(const std::string& path);
void write_masked_jsonl(const std::vector<MaskedRecord>& records,
                        const std::string& path);
std::string masked_record_to_json(const MaskedRecord& record);
MaskedRecord masked_record_from_json(std::string_view text,
                                     const std::string& context);

}  // namespace pseudoqe
