#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pseudoqe {

// LeftToRight fills masks in ascending order with earlier fills visible in
// the context; Parallel computes every mask's candidates against the
// original masked context.
enum class FillMode : std::uint8_t { LeftToRight = 0, Parallel = 1 };

std::string_view fill_mode_name(FillMode mode);
FillMode fill_mode_from_name(std::string_view name);

// One masked position to fill. context holds the full token sequence with
// mask symbols; context[position] is the mask being filled.
struct FillRequest {
  std::string source;
  std::vector<std::string> context;
  std::size_t position = 0;
  FillMode mode = FillMode::LeftToRight;
};

// Candidate fills, highest probability first. Ties are broken by
// lexicographic token order so candidate lists are deterministic.
struct CandidateSet {
  std::vector<std::string> tokens;
  std::vector<double> probs;

  // tokens non-empty and whitespace-free, probs positive and descending.
  void validate(const std::string& context) const;
};

// A conditional distribution over fill tokens. Implementations are the
// built-in n-gram model and the external subprocess protocol; both may be
// instantiated once per worker (handles are not shared across threads).
class Sampler {
 public:
  virtual ~Sampler() = default;

  // The k highest-probability tokens for the masked position, fewer when the
  // vocabulary is smaller.
  virtual CandidateSet top_k(const FillRequest& request, std::size_t k) = 0;
};

}  // namespace pseudoqe
