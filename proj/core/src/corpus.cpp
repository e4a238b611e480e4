#include "pseudoqe/corpus.hpp"

#include <cctype>
#include <sstream>

#include <json.hpp>

#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"
#include "pseudoqe/utf8.hpp"

namespace pseudoqe {

using json = nlohmann::ordered_json;

int penalty(Severity s) {
  switch (s) {
    case Severity::Minor:
      return 1;
    case Severity::Major:
      return 5;
    case Severity::Critical:
      return 10;
  }
  throw ValidationError("unknown severity value");
}

bool worse_than(Severity a, Severity b) {
  return static_cast<int>(a) > static_cast<int>(b);
}

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::Minor:
      return "minor";
    case Severity::Major:
      return "major";
    case Severity::Critical:
      return "critical";
  }
  throw ValidationError("unknown severity value");
}

Severity severity_from_name(std::string_view name) {
  if (name == "minor") return Severity::Minor;
  if (name == "major") return Severity::Major;
  if (name == "critical") return Severity::Critical;
  throw ValidationError("unknown severity name: '" + std::string(name) + "'");
}

std::string tags_to_string(const WordTagSeq& tags) {
  std::string out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i > 0) out += ' ';
    out += tags[i] == Tag::Ok ? "OK" : "BAD";
  }
  return out;
}

WordTagSeq tags_from_string(std::string_view text) {
  WordTagSeq tags;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    if (word == "OK") {
      tags.push_back(Tag::Ok);
    } else if (word == "BAD") {
      tags.push_back(Tag::Bad);
    } else {
      throw ValidationError("unknown tag '" + word + "' (expected OK or BAD)");
    }
  }
  return tags;
}

namespace {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  out.raw = std::string(text);

  std::size_t cp = 0;  // character index of the byte cursor
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) {
      ++i;
      ++cp;  // ASCII whitespace is always one scalar
    }
    if (i >= n) break;
    const std::size_t tok_begin_byte = i;
    const std::size_t tok_begin_cp = cp;
    while (i < n && !is_space(text[i])) {
      // advance one scalar
      const unsigned char b = static_cast<unsigned char>(text[i]);
      std::size_t len = 1;
      if ((b & 0xE0u) == 0xC0u)
        len = 2;
      else if ((b & 0xF0u) == 0xE0u)
        len = 3;
      else if ((b & 0xF8u) == 0xF0u)
        len = 4;
      if (i + len > n) len = 1;
      i += len;
      ++cp;
    }
    out.tokens.emplace_back(text.substr(tok_begin_byte, i - tok_begin_byte));
    out.offsets.emplace_back(tok_begin_cp, cp);
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string span_to_string(const ErrorSpan& span) {
  return std::to_string(span.start_char) + ":" + std::to_string(span.end_char) +
         ":" + std::string(severity_name(span.severity));
}

ErrorSpan span_from_string(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos
                          ? std::string_view::npos
                          : text.find(':', first + 1);
  if (second == std::string_view::npos) {
    throw ValidationError("malformed span '" + std::string(text) +
                          "' (expected start:end:severity)");
  }
  ErrorSpan span{};
  try {
    span.start_char = std::stoul(std::string(text.substr(0, first)));
    span.end_char =
        std::stoul(std::string(text.substr(first + 1, second - first - 1)));
  } catch (const std::exception&) {
    throw ValidationError("malformed span indices in '" + std::string(text) +
                          "'");
  }
  span.severity = severity_from_name(text.substr(second + 1));
  return span;
}

double mqm_score(std::size_t n_minor, std::size_t n_major,
                 std::size_t n_critical, std::size_t n) {
  if (n == 0) {
    throw ValidationError("empty translation: MQM score undefined for n = 0");
  }
  const double penalties = static_cast<double>(n_minor) +
                           5.0 * static_cast<double>(n_major) +
                           10.0 * static_cast<double>(n_critical);
  // (n - penalties) / n rather than 1 - penalties/n: both counts are exact
  // integers in double, so quotients like -6/10 round once instead of twice.
  return (static_cast<double>(n) - penalties) / static_cast<double>(n);
}

void validate_spans(const std::vector<ErrorSpan>& spans, std::size_t raw_chars,
                    const std::string& context) {
  std::size_t previous_end = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const ErrorSpan& s = spans[i];
    if (s.start_char >= s.end_char) {
      throw ValidationError(context + ": span " + span_to_string(s) +
                            " is empty or reversed");
    }
    if (s.end_char > raw_chars) {
      throw ValidationError(context + ": span " + span_to_string(s) +
                            " exceeds translation length " +
                            std::to_string(raw_chars));
    }
    if (i > 0 && s.start_char < previous_end) {
      throw ValidationError(context + ": spans overlap or are unsorted at " +
                            span_to_string(s));
    }
    previous_end = s.end_char;
  }
}

WordTagSeq tags_from_spans(const TokenizedText& translation,
                           const std::vector<ErrorSpan>& spans) {
  validate_spans(spans, utf8_length(translation.raw), "tags_from_spans");
  WordTagSeq tags(translation.size(), Tag::Ok);
  for (const ErrorSpan& s : spans) {
    for (std::size_t j = 0; j < translation.size(); ++j) {
      const auto [tok_begin, tok_end] = translation.offsets[j];
      if (tok_begin < s.end_char && s.start_char < tok_end) {
        tags[j] = Tag::Bad;
      }
    }
  }
  return tags;
}

namespace {

json sample_to_json_obj(const QESample& sample) {
  json obj;
  obj["id"] = sample.id;
  obj["src"] = sample.source;
  obj["mt"] = sample.translation.raw;
  if (sample.tags) obj["tags"] = tags_to_string(*sample.tags);
  if (sample.mqm) obj["score"] = *sample.mqm;
  if (sample.spans) {
    json arr = json::array();
    for (const ErrorSpan& s : *sample.spans) arr.push_back(span_to_string(s));
    obj["spans"] = arr;
  }
  return obj;
}

QESample sample_from_json_obj(const json& obj, const std::string& context) {
  if (!obj.is_object() || !obj.contains("id") || !obj.contains("src") ||
      !obj.contains("mt")) {
    throw ValidationError(context + ": record needs id, src and mt fields");
  }
  QESample sample;
  sample.id = obj.at("id").get<std::string>();
  sample.source = obj.at("src").get<std::string>();
  sample.translation = tokenize(obj.at("mt").get<std::string>());

  const std::string where = context + ": record '" + sample.id + "'";
  if (obj.contains("tags")) {
    WordTagSeq tags = tags_from_string(obj.at("tags").get<std::string>());
    if (tags.size() != sample.translation.size()) {
      throw ValidationError(where + ": " + std::to_string(tags.size()) +
                            " tags for " +
                            std::to_string(sample.translation.size()) +
                            " tokens");
    }
    sample.tags = std::move(tags);
  }
  if (obj.contains("score")) {
    if (!obj.at("score").is_number()) {
      throw ValidationError(where + ": score is not a number");
    }
    sample.mqm = obj.at("score").get<double>();
  }
  if (obj.contains("spans")) {
    std::vector<ErrorSpan> spans;
    for (const auto& item : obj.at("spans")) {
      spans.push_back(span_from_string(item.get<std::string>()));
    }
    validate_spans(spans, utf8_length(sample.translation.raw), where);
    if (sample.tags &&
        *sample.tags != tags_from_spans(sample.translation, spans)) {
      throw ValidationError(where + ": tags are inconsistent with spans");
    }
    sample.spans = std::move(spans);
  }
  return sample;
}

}  // namespace

std::string qe_sample_to_json(const QESample& sample) {
  return sample_to_json_obj(sample).dump();
}

QESample qe_sample_from_json(std::string_view json_text,
                             const std::string& context) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(context + ": malformed record: " + e.what());
  }
  return sample_from_json_obj(obj, context);
}

std::vector<QESample> read_qe_jsonl(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<QESample> samples;
  samples.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    samples.push_back(
        qe_sample_from_json(lines[i], path + ":" + std::to_string(i + 1)));
  }
  return samples;
}

void write_qe_jsonl(const std::vector<QESample>& samples,
                    const std::string& path) {
  AtomicFile file(path);
  for (const QESample& sample : samples) {
    file.stream() << qe_sample_to_json(sample) << '\n';
  }
  file.commit();
}

std::vector<ParallelPair> read_parallel_tsv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<ParallelPair> pairs;
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(i + 1) +
                            ": expected source<TAB>target");
    }
    pairs.push_back(
        {lines[i].substr(0, tab), lines[i].substr(tab + 1)});
  }
  return pairs;
}

void write_parallel_tsv(const std::vector<ParallelPair>& pairs,
                        const std::string& path) {
  AtomicFile file(path);
  for (const ParallelPair& p : pairs) {
    file.stream() << p.source << '\t' << p.target << '\n';
  }
  file.commit();
}

}  // namespace pseudoqe
