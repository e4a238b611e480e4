#include "pseudoqe/ensemble.hpp"

#include <cmath>
#include <sstream>

#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"

namespace pseudoqe {

std::vector<double> zscores(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);  // population variance
  const double std_dev = std::sqrt(var);

  std::vector<double> out(n, 0.0);
  if (std_dev == 0.0) return out;  // constant system contributes 0
  for (std::size_t i = 0; i < n; ++i) out[i] = (values[i] - mean) / std_dev;
  return out;
}

std::vector<double> zscore_ensemble(
    const std::vector<std::vector<double>>& per_system_scores) {
  if (per_system_scores.empty()) {
    throw ValidationError("zscore_ensemble: no systems");
  }
  const std::size_t n = per_system_scores.front().size();
  for (const auto& scores : per_system_scores) {
    if (scores.size() != n) {
      throw ValidationError("zscore_ensemble: systems differ in sample count");
    }
  }
  std::vector<double> combined(n, 0.0);
  for (const auto& scores : per_system_scores) {
    const std::vector<double> z = zscores(scores);
    for (std::size_t i = 0; i < n; ++i) combined[i] += z[i];
  }
  for (double& v : combined) {
    v /= static_cast<double>(per_system_scores.size());
  }
  return combined;
}

std::vector<std::vector<double>> average_ok_probs(
    const std::vector<std::vector<std::vector<double>>>& per_system_probs) {
  if (per_system_probs.empty()) {
    throw ValidationError("average_ok_probs: no systems");
  }
  const auto& first = per_system_probs.front();
  for (const auto& system : per_system_probs) {
    if (system.size() != first.size()) {
      throw ValidationError("average_ok_probs: systems differ in sample count");
    }
    for (std::size_t s = 0; s < system.size(); ++s) {
      if (system[s].size() != first[s].size()) {
        throw ValidationError(
            "average_ok_probs: token counts differ in sample " +
            std::to_string(s));
      }
    }
  }
  std::vector<std::vector<double>> out(first.size());
  for (std::size_t s = 0; s < first.size(); ++s) {
    out[s].assign(first[s].size(), 0.0);
    for (const auto& system : per_system_probs) {
      for (std::size_t i = 0; i < system[s].size(); ++i) {
        out[s][i] += system[s][i];
      }
    }
    for (double& v : out[s]) {
      v /= static_cast<double>(per_system_probs.size());
    }
  }
  return out;
}

WordTagSeq tag_by_threshold(std::span<const double> ok_probs, double e_bad) {
  WordTagSeq tags;
  tags.reserve(ok_probs.size());
  for (const double p : ok_probs) {
    tags.push_back(p > e_bad ? Tag::Ok : Tag::Bad);
  }
  return tags;
}

std::vector<std::optional<Severity>> fine_tag(std::span<const double> ok_probs,
                                              double e_minor, double e_major) {
  if (e_major > e_minor) {
    throw ValidationError("fine_tag: e_major must not exceed e_minor");
  }
  std::vector<std::optional<Severity>> out;
  out.reserve(ok_probs.size());
  for (const double p : ok_probs) {
    if (p > e_minor) {
      out.push_back(std::nullopt);
    } else if (p > e_major) {
      out.push_back(Severity::Minor);
    } else {
      out.push_back(Severity::Major);
    }
  }
  return out;
}

MergeRule merge_rule_from_name(std::string_view name) {
  if (name == "worst") return MergeRule::Worst;
  if (name == "majority") return MergeRule::Majority;
  throw ValidationError("unknown merge rule: '" + std::string(name) + "'");
}

namespace {

Severity merge_severity(const std::vector<Severity>& members, MergeRule rule) {
  if (rule == MergeRule::Worst) {
    Severity worst = members.front();
    for (const Severity s : members) {
      if (worse_than(s, worst)) worst = s;
    }
    return worst;
  }
  // Majority, ties to the worse severity.
  std::size_t counts[3] = {0, 0, 0};
  for (const Severity s : members) counts[static_cast<int>(s)] += 1;
  Severity best = Severity::Minor;
  std::size_t best_count = 0;
  for (int i = 0; i < 3; ++i) {
    if (counts[i] >= best_count && counts[i] > 0) {
      best = static_cast<Severity>(i);
      best_count = counts[i];
    }
  }
  return best;
}

}  // namespace

std::vector<ErrorSpan> assemble_spans(
    const std::vector<std::optional<Severity>>& token_severities,
    const TokenizedText& translation, MergeRule rule) {
  if (token_severities.size() != translation.size()) {
    throw ValidationError("assemble_spans: tag/token count mismatch");
  }
  std::vector<ErrorSpan> spans;
  std::size_t i = 0;
  const std::size_t n = token_severities.size();
  while (i < n) {
    if (!token_severities[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::vector<Severity> members;
    while (j < n && token_severities[j]) {
      members.push_back(*token_severities[j]);
      ++j;
    }
    spans.push_back({translation.offsets[i].first,
                     translation.offsets[j - 1].second,
                     merge_severity(members, rule)});
    i = j;
  }
  return spans;
}

std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0) || step > 1.0) {
    throw ValidationError("threshold grid: step must be in (0, 1]");
  }
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::round(1.0 / step));
  for (std::size_t i = 0; i <= count; ++i) {
    grid.push_back(std::min(1.0, static_cast<double>(i) * step));
  }
  return grid;
}

BadThresholdSearch grid_search_e_bad(
    const std::vector<std::vector<double>>& ok_probs,
    const std::vector<WordTagSeq>& gold_tags, std::span<const double> grid) {
  if (ok_probs.empty() || grid.empty()) {
    throw ValidationError("grid_search_e_bad: empty dev set or grid");
  }
  BadThresholdSearch best{grid.front(), -2.0};
  for (const double e_bad : grid) {
    std::vector<WordTagSeq> tags;
    tags.reserve(ok_probs.size());
    for (const auto& probs : ok_probs) {
      tags.push_back(tag_by_threshold(probs, e_bad));
    }
    const double value = mcc(tags, gold_tags);
    if (value > best.mcc) {
      best = {e_bad, value};
    }
  }
  return best;
}

FineThresholdSearch grid_search_fine(
    const std::vector<std::vector<double>>& ok_probs,
    const std::vector<TokenizedText>& translations,
    const std::vector<std::vector<ErrorSpan>>& gold_spans,
    std::span<const double> grid, SpanMatch mode, MergeRule rule) {
  if (ok_probs.empty() || grid.empty()) {
    throw ValidationError("grid_search_fine: empty dev set or grid");
  }
  if (ok_probs.size() != translations.size() ||
      ok_probs.size() != gold_spans.size()) {
    throw ValidationError("grid_search_fine: input lengths differ");
  }
  FineThresholdSearch best{grid.front(), grid.front(), -1.0};
  for (const double e_minor : grid) {
    for (const double e_major : grid) {
      if (e_major > e_minor) break;
      std::vector<std::vector<ErrorSpan>> pred;
      pred.reserve(ok_probs.size());
      for (std::size_t s = 0; s < ok_probs.size(); ++s) {
        pred.push_back(assemble_spans(
            fine_tag(ok_probs[s], e_minor, e_major), translations[s], rule));
      }
      const double value = span_f1(pred, gold_spans, mode);
      if (value > best.f1) {
        best = {e_minor, e_major, value};
      }
    }
  }
  return best;
}

std::vector<SpanRecord> read_span_file(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<SpanRecord> records;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    SpanRecord record;
    std::istringstream in(lines[i]);
    std::string field;
    if (!std::getline(in, field, '\t')) {
      throw ValidationError(path + ":" + std::to_string(i + 1) + ": no id");
    }
    record.id = field;
    while (std::getline(in, field, '\t')) {
      if (field.empty()) continue;
      record.spans.push_back(span_from_string(field));
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_span_file(const std::vector<SpanRecord>& records,
                     const std::string& path) {
  AtomicFile file(path);
  for (const SpanRecord& record : records) {
    file.stream() << record.id;
    for (const ErrorSpan& span : record.spans) {
      file.stream() << '\t' << span_to_string(span);
    }
    file.stream() << '\n';
  }
  file.commit();
}

}  // namespace pseudoqe
