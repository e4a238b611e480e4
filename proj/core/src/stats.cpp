#include "pseudoqe/stats.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"

namespace pseudoqe {

using json = nlohmann::ordered_json;

template <typename T>
void Categorical<T>::validate(const std::string& name) const {
  if (support.size() != probs.size()) {
    throw ValidationError(name + ": support and probs differ in length");
  }
  if (support.empty()) {
    throw ValidationError(name + ": empty distribution");
  }
  double sum = 0.0;
  for (const double p : probs) {
    if (!(p >= 0.0)) {
      throw ValidationError(name + ": negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError(name + ": probabilities sum to " +
                          format_double(sum) + ", expected 1");
  }
  std::set<T> seen(support.begin(), support.end());
  if (seen.size() != support.size()) {
    throw ValidationError(name + ": duplicate support values");
  }
}

template <typename T>
const T& Categorical<T>::sample(Rng& rng) const {
  const double u = rng.next_double();
  double cum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    cum += probs[i];
    if (u < cum) return support[i];
  }
  return support.back();  // guards against rounding in the final bucket
}

template struct Categorical<std::size_t>;
template struct Categorical<Severity>;

void CorruptionStats::validate() const {
  span_count.validate("span_count");
  span_length.validate("span_length");
  severity.validate("severity");
  for (const std::size_t len : span_length.support) {
    if (len == 0) throw ValidationError("span_length: zero-length support");
  }
}

namespace {

// Tokens whose character range overlaps the span.
std::size_t span_token_length(const TokenizedText& translation,
                              const ErrorSpan& span) {
  std::size_t count = 0;
  for (const auto& [tok_begin, tok_end] : translation.offsets) {
    if (tok_begin < span.end_char && span.start_char < tok_end) ++count;
  }
  return count;
}

template <typename T>
Categorical<T> from_counts(const std::map<T, std::size_t>& counts,
                           std::size_t total) {
  Categorical<T> dist;
  for (const auto& [value, count] : counts) {
    dist.support.push_back(value);
    dist.probs.push_back(static_cast<double>(count) /
                         static_cast<double>(total));
  }
  return dist;
}

}  // namespace

CorruptionStats estimate_stats(const std::vector<QESample>& samples) {
  if (samples.empty()) {
    throw ValidationError("estimate_stats: no samples");
  }
  std::map<std::size_t, std::size_t> count_freq;
  std::map<std::size_t, std::size_t> length_freq;
  std::map<Severity, std::size_t> severity_freq;
  std::size_t total_spans = 0;

  for (const QESample& sample : samples) {
    if (!sample.spans) {
      throw ValidationError("estimate_stats: record '" + sample.id +
                            "' has no span annotation");
    }
    count_freq[sample.spans->size()] += 1;
    for (const ErrorSpan& span : *sample.spans) {
      const std::size_t len = span_token_length(sample.translation, span);
      if (len == 0) {
        throw ValidationError("estimate_stats: record '" + sample.id +
                              "' has a span covering no token");
      }
      length_freq[len] += 1;
      severity_freq[span.severity] += 1;
      ++total_spans;
    }
  }
  if (total_spans == 0) {
    throw ValidationError(
        "estimate_stats: no spans to estimate length/severity distributions");
  }

  CorruptionStats stats;
  stats.span_count = from_counts(count_freq, samples.size());
  stats.span_length = from_counts(length_freq, total_spans);
  stats.severity = from_counts(severity_freq, total_spans);
  stats.validate();
  return stats;
}

CorruptionStats default_stats() {
  CorruptionStats stats;
  stats.span_count = {{0, 1, 2, 3, 4}, {0.10, 0.35, 0.30, 0.15, 0.10}};
  stats.span_length = {{1, 2, 3, 4, 5, 6}, {0.35, 0.25, 0.15, 0.10, 0.10, 0.05}};
  stats.severity = {{Severity::Minor, Severity::Major, Severity::Critical},
                    {0.45, 0.50, 0.05}};
  stats.validate();
  return stats;
}

namespace {

json size_dist_to_json(const Categorical<std::size_t>& dist) {
  json obj;
  obj["support"] = dist.support;
  obj["probs"] = dist.probs;
  return obj;
}

json severity_dist_to_json(const Categorical<Severity>& dist) {
  json obj;
  json names = json::array();
  for (const Severity s : dist.support) names.push_back(severity_name(s));
  obj["support"] = names;
  obj["probs"] = dist.probs;
  return obj;
}

template <typename T, typename Conv>
Categorical<T> dist_from_json(const json& obj, const std::string& name,
                              Conv conv) {
  if (!obj.is_object() || !obj.contains("support") || !obj.contains("probs")) {
    throw ValidationError("stats file: distribution '" + name +
                          "' needs support and probs");
  }
  Categorical<T> dist;
  for (const auto& v : obj.at("support")) dist.support.push_back(conv(v));
  for (const auto& p : obj.at("probs")) dist.probs.push_back(p.get<double>());
  dist.validate(name);
  return dist;
}

}  // namespace

CorruptionStats read_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open stats file: " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("stats file " + path + ": " + e.what());
  }
  CorruptionStats stats;
  stats.span_count = dist_from_json<std::size_t>(
      doc.value("span_count", json()), "span_count",
      [](const json& v) { return v.get<std::size_t>(); });
  stats.span_length = dist_from_json<std::size_t>(
      doc.value("span_length", json()), "span_length",
      [](const json& v) { return v.get<std::size_t>(); });
  stats.severity = dist_from_json<Severity>(
      doc.value("severity", json()), "severity",
      [](const json& v) { return severity_from_name(v.get<std::string>()); });
  stats.validate();
  return stats;
}

void write_stats(const CorruptionStats& stats, const std::string& path) {
  stats.validate();
  json doc;
  doc["format"] = "pseudoqe-stats-v1";
  doc["span_count"] = size_dist_to_json(stats.span_count);
  doc["span_length"] = size_dist_to_json(stats.span_length);
  doc["severity"] = severity_dist_to_json(stats.severity);
  AtomicFile file(path);
  file.stream() << doc.dump(2) << '\n';
  file.commit();
}

}  // namespace pseudoqe
