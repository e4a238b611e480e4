#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pseudoqe {

// All types here are immutable after construction and all operations are pure
// functions, so everything is safe to share across parallel workers.

enum class Severity : std::uint8_t { Minor = 0, Major = 1, Critical = 2 };

// Penalty weights of the MQM scoring scheme: minor 1, major 5, critical 10.
int penalty(Severity s);

// Critical > Major > Minor.
bool worse_than(Severity a, Severity b);

// Lowercase names, the on-disk encoding: "minor", "major", "critical".
std::string_view severity_name(Severity s);
Severity severity_from_name(std::string_view name);

enum class Tag : std::uint8_t { Ok = 0, Bad = 1 };

using WordTagSeq = std::vector<Tag>;

// "OK BAD OK" <-> tag sequence.
std::string tags_to_string(const WordTagSeq& tags);
WordTagSeq tags_from_string(std::string_view text);

// A sentence with whitespace tokens and their character offsets. Offsets are
// (start, end) pairs, end-exclusive, in Unicode scalar values into raw.
struct TokenizedText {
  std::string raw;
  std::vector<std::string> tokens;
  std::vector<std::pair<std::size_t, std::size_t>> offsets;

  std::size_t size() const { return tokens.size(); }
};

// Whitespace-delimited tokenization. Empty text gives zero tokens.
// detokenize(tokenize(t).tokens) == t with whitespace runs collapsed.
TokenizedText tokenize(std::string_view text);

// Single-space join. Original inter-token whitespace is not preserved.
std::string detokenize(const std::vector<std::string>& tokens);

// Character-level error span, end-exclusive, with one severity.
struct ErrorSpan {
  std::size_t start_char;
  std::size_t end_char;
  Severity severity;

  bool operator==(const ErrorSpan&) const = default;
};

// "10:15:major" <-> span.
std::string span_to_string(const ErrorSpan& span);
ErrorSpan span_from_string(std::string_view text);

// 1 - (n_minor + 5 n_major + 10 n_critical) / n. May be negative; stored
// unclamped. n = 0 is an error ("empty translation").
double mqm_score(std::size_t n_minor, std::size_t n_major,
                 std::size_t n_critical, std::size_t n);

// A token is BAD iff its character range overlaps any span. Spans must be
// sorted, pairwise disjoint, and inside the text; mid-token boundaries are
// accepted and mark the whole overlapping token BAD.
WordTagSeq tags_from_spans(const TokenizedText& translation,
                           const std::vector<ErrorSpan>& spans);

// Throws ValidationError unless spans are in-bounds, sorted by start_char and
// pairwise disjoint.
void validate_spans(const std::vector<ErrorSpan>& spans, std::size_t raw_chars,
                    const std::string& context);

// The record every pipeline stage exchanges. tags, mqm and spans are optional
// because upstream stages produce them incrementally.
struct QESample {
  std::string id;
  std::string source;
  TokenizedText translation;
  std::optional<WordTagSeq> tags;
  std::optional<double> mqm;
  std::optional<std::vector<ErrorSpan>> spans;
};

// Line-delimited JSON records with fields id, src, mt, tags, score, spans.
// Reading validates tag counts, span bounds and tag/span consistency; errors
// name the line number and record id. Write-then-read round-trips exactly.
std::vector<QESample> read_qe_jsonl(const std::string& path);
void write_qe_jsonl(const std::vector<QESample>& samples,
                    const std::string& path);

// Single-record JSON codec, shared with the masked-record format.
std::string qe_sample_to_json(const QESample& sample);
QESample qe_sample_from_json(std::string_view json_text,
                             const std::string& context);

struct ParallelPair {
  std::string source;
  std::string target;
};

// Tab-separated source<TAB>target, one pair per line.
std::vector<ParallelPair> read_parallel_tsv(const std::string& path);
void write_parallel_tsv(const std::vector<ParallelPair>& pairs,
                        const std::string& path);

}  // namespace pseudoqe
