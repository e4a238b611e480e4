#include "pseudoqe/sampler.hpp"

#include <algorithm>
#include <limits>

#include "pseudoqe/error.hpp"

namespace pseudoqe {

std::string_view fill_mode_name(FillMode mode) {
  return mode == FillMode::LeftToRight ? "l2r" : "parallel";
}

FillMode fill_mode_from_name(std::string_view name) {
  if (name == "l2r") return FillMode::LeftToRight;
  if (name == "parallel") return FillMode::Parallel;
  throw ValidationError("unknown fill mode: '" + std::string(name) + "'");
}

void CandidateSet::validate(const std::string& context) const {
  if (tokens.size() != probs.size()) {
    throw ValidationError(context + ": tokens/probs length mismatch");
  }
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty() ||
        tokens[i].find_first_of(" \t\n\r\f\v") != std::string::npos) {
      throw ValidationError(context + ": candidate token " +
                            std::to_string(i) + " is empty or has whitespace");
    }
    if (!(probs[i] > 0.0) || probs[i] > previous) {
      throw ValidationError(context +
                            ": probs must be positive and descending");
    }
    previous = probs[i];
  }
}

}  // namespace pseudoqe
