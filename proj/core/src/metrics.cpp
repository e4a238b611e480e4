#include "pseudoqe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pseudoqe/error.hpp"

namespace pseudoqe {

namespace {

// Average fractional ranks, 1-based; tied values share the mean of their
// positions.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });

  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("undefined correlation: zero rank variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) {
    throw ValidationError("spearman: length mismatch");
  }
  if (pred.size() < 2) {
    throw ValidationError("undefined correlation: need at least two points");
  }
  return pearson(average_ranks(pred), average_ranks(gold));
}

ConfusionCounts confusion(const std::vector<WordTagSeq>& pred,
                          const std::vector<WordTagSeq>& gold) {
  if (pred.size() != gold.size()) {
    throw ValidationError("confusion: sentence count mismatch");
  }
  ConfusionCounts counts;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != gold[s].size()) {
      throw ValidationError("confusion: token count mismatch in sentence " +
                            std::to_string(s));
    }
    for (std::size_t i = 0; i < pred[s].size(); ++i) {
      const bool p = pred[s][i] == Tag::Bad;
      const bool g = gold[s][i] == Tag::Bad;
      if (p && g)
        ++counts.tp;
      else if (!p && !g)
        ++counts.tn;
      else if (p && !g)
        ++counts.fp;
      else
        ++counts.fn;
    }
  }
  return counts;
}

double mcc(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double d1 = tp + fp;
  const double d2 = tp + fn;
  const double d3 = tn + fp;
  const double d4 = tn + fn;
  if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0 || d4 == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(d1 * d2 * d3 * d4);
}

double mcc(const std::vector<WordTagSeq>& pred,
           const std::vector<WordTagSeq>& gold) {
  return mcc(confusion(pred, gold));
}

SpanMatch span_match_from_name(std::string_view name) {
  if (name == "strict") return SpanMatch::Strict;
  if (name == "lenient") return SpanMatch::Lenient;
  throw ValidationError("unknown span match mode: '" + std::string(name) +
                        "'");
}

std::string_view span_match_name(SpanMatch mode) {
  return mode == SpanMatch::Strict ? "strict" : "lenient";
}

double span_f1(const std::vector<std::vector<ErrorSpan>>& pred,
               const std::vector<std::vector<ErrorSpan>>& gold,
               SpanMatch mode) {
  if (pred.size() != gold.size()) {
    throw ValidationError("span_f1: sample count mismatch");
  }
  double score = 0.0;
  std::uint64_t pred_chars = 0;
  std::uint64_t gold_chars = 0;

  for (std::size_t s = 0; s < pred.size(); ++s) {
    std::map<std::size_t, Severity> gold_map;
    std::size_t previous_end = 0;
    bool first = true;
    for (const ErrorSpan& span : gold[s]) {
      if (!first && span.start_char < previous_end) {
        throw ValidationError("span_f1: overlapping gold spans in sample " +
                              std::to_string(s));
      }
      first = false;
      previous_end = std::max(previous_end, span.end_char);
      for (std::size_t c = span.start_char; c < span.end_char; ++c) {
        gold_map.emplace(c, span.severity);
      }
    }
    gold_chars += gold_map.size();

    std::map<std::size_t, Severity> pred_map;
    for (const ErrorSpan& span : pred[s]) {
      for (std::size_t c = span.start_char; c < span.end_char; ++c) {
        if (!pred_map.emplace(c, span.severity).second) {
          throw ValidationError(
              "span_f1: overlapping predicted spans in sample " +
              std::to_string(s));
        }
      }
    }
    pred_chars += pred_map.size();

    for (const auto& [pos, severity] : pred_map) {
      const auto it = gold_map.find(pos);
      if (it == gold_map.end()) continue;
      if (it->second == severity) {
        score += 1.0;
      } else if (mode == SpanMatch::Lenient) {
        score += 0.5;
      }
    }
  }

  if (pred_chars == 0 && gold_chars == 0) return 1.0;
  if (pred_chars == 0 || gold_chars == 0) return 0.0;
  const double precision = score / static_cast<double>(pred_chars);
  const double recall = score / static_cast<double>(gold_chars);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace pseudoqe
