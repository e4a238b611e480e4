#pragma once

#include <stdexcept>
#include <string>

namespace pseudoqe {

// Bad input: malformed files, inconsistent records, invalid parameters.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// External sampler subprocess failure: protocol violation, timeout, early exit.
class SamplerError : public std::runtime_error {
 public:
  explicit SamplerError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pseudoqe
