#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "pseudoqe/sampler.hpp"

namespace pseudoqe {

// Bridges fill requests to a user-provided subprocess, the hook for plugging
// in real translation or masked language models.
//
// Protocol: newline-delimited JSON over the child's stdin/stdout. One request
// object per line out:
//   {"src": "...", "ctx": ["w", "<mask>", ...], "pos": 3, "mode": "l2r", "k": 10}
// one response object per line back:
//   {"tokens": ["a", "b"], "probs": [0.6, 0.4]}
// Responses must arrive in request order. Any malformed line, child exit or
// timeout raises SamplerError naming the cause.
//
// Handles own one child process each and are not shareable across threads;
// spawn one per worker.
class ExternalSampler final : public Sampler {
 public:
  explicit ExternalSampler(
      const std::string& command,
      std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalSampler() override;

  ExternalSampler(const ExternalSampler&) = delete;
  ExternalSampler& operator=(const ExternalSampler&) = delete;

  CandidateSet top_k(const FillRequest& request, std::size_t k) override;

 private:
  struct Process;
  std::unique_ptr<Process> process_;
  std::chrono::milliseconds timeout_;
};

}  // namespace pseudoqe
