#include "pseudoqe/corruptor.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"

namespace pseudoqe {

using json = nlohmann::ordered_json;

CorruptionPlan plan_corruption(std::size_t n, const CorruptionStats& stats,
                               EditProbs edit_probs, Rng& rng) {
  if (n == 0) {
    throw ValidationError("plan_corruption: empty reference");
  }
  stats.validate();
  if (edit_probs.insert < 0 || edit_probs.remove < 0 ||
      edit_probs.insert + edit_probs.remove > 1.0) {
    throw ValidationError("plan_corruption: invalid edit probabilities");
  }

  CorruptionPlan plan;
  plan.reference_len = n;

  // 1. span count, capped so that t spans of length >= 1 can fit with the
  //    total strictly below n.
  std::size_t t = stats.span_count.sample(rng);
  t = std::min(t, n - 1);
  if (t == 0) return plan;

  // 2. lengths, sampled sequentially; a draw that would push the running
  //    total to n or beyond is retried up to 20 times, then the remaining
  //    spans are given up.
  std::vector<std::size_t> lengths;
  std::size_t total = 0;
  for (std::size_t i = 0; i < t; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const std::size_t len = stats.span_length.sample(rng);
      if (total + len < n) {
        lengths.push_back(len);
        total += len;
        placed = true;
        break;
      }
    }
    if (!placed) break;
  }
  if (lengths.empty()) return plan;

  // 3. start indices: span i is uniform in [EOL_i, n - sum of lengths i..t),
  //    where EOL_i is the end of the previous span (EOL_0 = 0).
  std::vector<std::size_t> suffix(lengths.size() + 1, 0);
  for (std::size_t i = lengths.size(); i-- > 0;) {
    suffix[i] = suffix[i + 1] + lengths[i];
  }
  std::size_t eol = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const std::size_t hi = n - suffix[i];
    const std::size_t start = rng.uniform_int(eol, hi);
    plan.spans.push_back({start, lengths[i], Severity::Minor});
    eol = start + lengths[i];
  }

  // 4. severities.
  for (PlannedSpan& span : plan.spans) {
    span.severity = stats.severity.sample(rng);
  }

  // 5. insert/delete edits.
  for (PlannedSpan& span : plan.spans) {
    const double u = rng.next_double();
    if (u < edit_probs.insert) {
      span.edit = EditKind::Insert;
      span.edit_count = rng.uniform_int(1, span.length);
    } else if (u < edit_probs.insert + edit_probs.remove && span.length >= 2) {
      span.edit = EditKind::Delete;
      span.edit_count = rng.uniform_int(1, span.length - 1);
    } else {
      span.edit = EditKind::Replace;
      span.edit_count = 0;
    }
  }
  return plan;
}

namespace {

void validate_plan(const TokenizedText& reference, const CorruptionPlan& plan) {
  const std::size_t n = reference.size();
  if (plan.reference_len != n) {
    throw ValidationError("apply_corruption: plan built for " +
                          std::to_string(plan.reference_len) +
                          " tokens, reference has " + std::to_string(n));
  }
  std::size_t eol = 0;
  std::size_t total = 0;
  for (const PlannedSpan& span : plan.spans) {
    if (span.length == 0) {
      throw ValidationError("apply_corruption: zero-length span");
    }
    if (span.start_tok < eol) {
      throw ValidationError("apply_corruption: spans overlap or are unsorted");
    }
    if (span.start_tok + span.length > n) {
      throw ValidationError("apply_corruption: span exceeds reference length");
    }
    if (span.edit == EditKind::Delete && span.edit_count > span.length) {
      throw ValidationError(
          "apply_corruption: delete count exceeds span length");
    }
    if (span.edit != EditKind::Replace && span.edit_count == 0) {
      throw ValidationError("apply_corruption: edit with zero count");
    }
    eol = span.start_tok + span.length;
    total += span.length;
  }
  if (!plan.spans.empty() && total >= n) {
    throw ValidationError(
        "apply_corruption: span lengths reach the reference length");
  }
}

}  // namespace

MaskedTranslation apply_corruption(const TokenizedText& reference,
                                   const CorruptionPlan& plan, Rng& rng) {
  validate_plan(reference, plan);

  MaskedTranslation out;
  std::vector<bool> bad;  // parallel to out.tokens
  // Output positions whose next appended token carries the omission marker.
  std::vector<std::size_t> pending_markers;

  std::size_t cursor = 0;
  for (const PlannedSpan& span : plan.spans) {
    for (; cursor < span.start_tok; ++cursor) {
      out.tokens.push_back(reference.tokens[cursor]);
      bad.push_back(false);
    }

    MaskGroup group;
    group.severity = span.severity;
    const std::size_t removed =
        span.edit == EditKind::Delete ? span.edit_count : 0;
    for (std::size_t j = removed; j < span.length; ++j) {
      group.original.push_back(reference.tokens[span.start_tok + j]);
    }
    if (span.edit == EditKind::Insert) {
      for (std::size_t e = 0; e < span.edit_count; ++e) {
        const std::size_t slot = rng.index(group.original.size() + 1);
        group.original.insert(group.original.begin() +
                                  static_cast<std::ptrdiff_t>(slot),
                              std::nullopt);
      }
    }
    if (removed > 0) {
      pending_markers.push_back(out.tokens.size());
    }
    for (std::size_t j = 0; j < group.original.size(); ++j) {
      group.positions.push_back(out.tokens.size());
      out.tokens.emplace_back(kMaskToken);
      bad.push_back(true);
    }
    out.mask_groups.push_back(std::move(group));
    cursor = span.start_tok + span.length;
  }
  for (; cursor < reference.size(); ++cursor) {
    out.tokens.push_back(reference.tokens[cursor]);
    bad.push_back(false);
  }

  // Omission markers: the token right of each deletion point, or the nearest
  // surviving token to the left when the deletion ended the sentence.
  for (const std::size_t pos : pending_markers) {
    if (pos < out.tokens.size()) {
      bad[pos] = true;
    } else if (!out.tokens.empty()) {
      bad[out.tokens.size() - 1] = true;
    }
  }

  out.gold_tags.reserve(bad.size());
  for (const bool b : bad) {
    out.gold_tags.push_back(b ? Tag::Bad : Tag::Ok);
  }

  std::size_t n_minor = 0, n_major = 0, n_critical = 0;
  for (const PlannedSpan& span : plan.spans) {
    switch (span.severity) {
      case Severity::Minor:
        ++n_minor;
        break;
      case Severity::Major:
        ++n_major;
        break;
      case Severity::Critical:
        ++n_critical;
        break;
    }
  }
  out.pseudo_mqm = mqm_score(n_minor, n_major, n_critical, out.tokens.size());
  return out;
}

namespace {

json masked_to_json_obj(const MaskedRecord& record) {
  const MaskedTranslation& m = record.masked;
  json obj;
  obj["id"] = record.id;
  obj["src"] = record.source;
  obj["mt"] = detokenize(m.tokens);
  obj["tags"] = tags_to_string(m.gold_tags);
  obj["score"] = m.pseudo_mqm;
  json groups = json::array();
  for (const MaskGroup& g : m.mask_groups) {
    json item;
    item["pos"] = g.positions;
    item["severity"] = severity_name(g.severity);
    json refs = json::array();
    for (const auto& r : g.original) {
      if (r) {
        refs.push_back(*r);
      } else {
        refs.push_back(nullptr);
      }
    }
    item["ref"] = refs;
    groups.push_back(std::move(item));
  }
  obj["masks"] = groups;
  return obj;
}

MaskedRecord masked_from_json_obj(const json& obj, const std::string& context) {
  for (const char* field : {"id", "src", "mt", "tags", "score", "masks"}) {
    if (!obj.contains(field)) {
      throw ValidationError(context + ": masked record needs field '" +
                            std::string(field) + "'");
    }
  }
  MaskedRecord record;
  record.id = obj.at("id").get<std::string>();
  record.source = obj.at("src").get<std::string>();
  const std::string where = context + ": record '" + record.id + "'";

  MaskedTranslation& m = record.masked;
  m.tokens = tokenize(obj.at("mt").get<std::string>()).tokens;
  m.gold_tags = tags_from_string(obj.at("tags").get<std::string>());
  if (m.gold_tags.size() != m.tokens.size()) {
    throw ValidationError(where + ": tag count does not match token count");
  }
  m.pseudo_mqm = obj.at("score").get<double>();
  for (const auto& item : obj.at("masks")) {
    MaskGroup group;
    group.severity =
        severity_from_name(item.at("severity").get<std::string>());
    for (const auto& p : item.at("pos")) {
      group.positions.push_back(p.get<std::size_t>());
    }
    for (const auto& r : item.at("ref")) {
      if (r.is_null()) {
        group.original.push_back(std::nullopt);
      } else {
        group.original.push_back(r.get<std::string>());
      }
    }
    if (group.positions.size() != group.original.size()) {
      throw ValidationError(where + ": mask group pos/ref length mismatch");
    }
    for (const std::size_t p : group.positions) {
      if (p >= m.tokens.size() || m.tokens[p] != kMaskToken) {
        throw ValidationError(where + ": mask position " + std::to_string(p) +
                              " does not hold the mask symbol");
      }
      if (m.gold_tags[p] != Tag::Bad) {
        throw ValidationError(where + ": mask position " + std::to_string(p) +
                              " is not tagged BAD");
      }
    }
    m.mask_groups.push_back(std::move(group));
  }
  return record;
}

}  // namespace

std::string masked_record_to_json(const MaskedRecord& record) {
  return masked_to_json_obj(record).dump();
}

MaskedRecord masked_record_from_json(std::string_view text,
                                     const std::string& context) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(context + ": malformed record: " + e.what());
  }
  return masked_from_json_obj(obj, context);
}

std::vector<MaskedRecord> read_masked_jsonl(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<MaskedRecord> records;
  records.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    records.push_back(masked_record_from_json(
        lines[i], path + ":" + std::to_string(i + 1)));
  }
  return records;
}

void write_masked_jsonl(const std::vector<MaskedRecord>& records,
                        const std::string& path) {
  AtomicFile file(path);
  for (const MaskedRecord& record : records) {
    file.stream() << masked_record_to_json(record) << '\n';
  }
  file.commit();
}

}  // namespace pseudoqe
