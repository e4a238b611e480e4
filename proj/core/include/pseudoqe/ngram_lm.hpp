#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pseudoqe/sampler.hpp"

namespace pseudoqe {

// Begin-of-sentence padding marker. Never part of the vocabulary and never a
// fill candidate.
inline constexpr std::string_view kSentenceStart = "<s>";

// Count-based n-gram model with stupid-backoff scoring (factor 0.4).
// The built-in stand-in for a translation model on the fixing stage: it
// conditions on target-side context only.
class NgramLm {
 public:
  NgramLm() = default;

  // Counts all n-gram orders 1..order over the corpus, each sentence padded
  // with order-1 start markers.
  static NgramLm train(const std::vector<std::vector<std::string>>& corpus,
                       std::size_t order = 3);

  std::size_t order() const { return order_; }

  // Sorted, markers excluded.
  const std::vector<std::string>& vocabulary() const { return vocab_; }

  // Raw backoff score: count(context+word)/count(context) at the longest
  // matching order, discounted by 0.4 per backoff step, down to the unigram
  // relative frequency. Zero for out-of-vocabulary words.
  double backoff_score(std::span<const std::string> context,
                       const std::string& word) const;

  // Backoff scores over the whole vocabulary, normalized to sum to 1.
  // context is the preceding token sequence; only the last order-1 entries
  // are used, padded with start markers when shorter.
  std::vector<std::pair<std::string, double>> distribution(
      std::span<const std::string> context) const;

  // Versioned JSON document of count tables.
  void save(const std::string& path) const;
  static NgramLm load(const std::string& path);

 private:
  std::size_t order_ = 0;
  double backoff_factor_ = 0.4;
  std::uint64_t total_tokens_ = 0;
  // counts_[k-1] maps space-joined k-grams to counts.
  std::vector<std::map<std::string, std::uint64_t>> counts_;
  std::vector<std::string> vocab_;
};

// Sampler over an n-gram model. Mask symbols in the context are unseen
// tokens, so they back off like any unknown word.
class NgramSampler final : public Sampler {
 public:
  explicit NgramSampler(const NgramLm& lm) : lm_(&lm) {}

  CandidateSet top_k(const FillRequest& request, std::size_t k) override;

 private:
  const NgramLm* lm_;
};

}  // namespace pseudoqe
