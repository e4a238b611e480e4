#include "pseudoqe/ngram_lm.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"

namespace pseudoqe {

using json = nlohmann::ordered_json;

namespace {

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace

NgramLm NgramLm::train(const std::vector<std::vector<std::string>>& corpus,
                       std::size_t order) {
  if (corpus.empty()) {
    throw ValidationError("ngram training: empty corpus");
  }
  if (order == 0) {
    throw ValidationError("ngram training: order must be at least 1");
  }
  NgramLm lm;
  lm.order_ = order;
  lm.counts_.resize(order);

  std::set<std::string> vocab;
  for (const auto& sentence : corpus) {
    std::vector<std::string> padded;
    padded.reserve(sentence.size() + order - 1);
    for (std::size_t i = 0; i + 1 < order; ++i) {
      padded.emplace_back(kSentenceStart);
    }
    for (const std::string& tok : sentence) {
      if (tok.empty()) {
        throw ValidationError("ngram training: empty token");
      }
      padded.push_back(tok);
      vocab.insert(tok);
      ++lm.total_tokens_;
    }
    for (std::size_t k = 1; k <= order; ++k) {
      if (padded.size() < k) continue;
      for (std::size_t i = 0; i + k <= padded.size(); ++i) {
        lm.counts_[k - 1][join({padded.data() + i, k})] += 1;
      }
    }
  }
  if (lm.total_tokens_ == 0) {
    throw ValidationError("ngram training: corpus has no tokens");
  }
  vocab.erase(std::string(kSentenceStart));
  lm.vocab_.assign(vocab.begin(), vocab.end());
  return lm;
}

double NgramLm::backoff_score(std::span<const std::string> context,
                              const std::string& word) const {
  const std::size_t ctx_len = std::min(context.size(), order_ - 1);
  std::span<const std::string> ctx = context.subspan(context.size() - ctx_len);

  double factor = 1.0;
  for (std::size_t k = ctx.size(); k > 0; --k) {
    std::span<const std::string> tail = ctx.subspan(ctx.size() - k);
    const auto& table = counts_[k];  // (k+1)-grams
    const auto full = table.find(join(tail) + " " + word);
    if (full != table.end() && full->second > 0) {
      const auto ctx_count = counts_[k - 1].find(join(tail));
      if (ctx_count != counts_[k - 1].end() && ctx_count->second > 0) {
        return factor * static_cast<double>(full->second) /
               static_cast<double>(ctx_count->second);
      }
    }
    factor *= backoff_factor_;
  }
  const auto uni = counts_[0].find(word);
  if (uni == counts_[0].end()) return 0.0;
  return factor * static_cast<double>(uni->second) /
         static_cast<double>(total_tokens_);
}

std::vector<std::pair<std::string, double>> NgramLm::distribution(
    std::span<const std::string> context) const {
  std::vector<std::pair<std::string, double>> scores;
  scores.reserve(vocab_.size());
  double sum = 0.0;
  for (const std::string& word : vocab_) {
    const double s = backoff_score(context, word);
    scores.emplace_back(word, s);
    sum += s;
  }
  if (sum <= 0.0) {
    throw ValidationError("ngram distribution: no probability mass");
  }
  for (auto& [word, s] : scores) s /= sum;
  return scores;
}

void NgramLm::save(const std::string& path) const {
  json doc;
  doc["format"] = "pseudoqe-ngram-v1";
  doc["order"] = order_;
  doc["backoff"] = backoff_factor_;
  doc["total_tokens"] = total_tokens_;
  json tables = json::array();
  for (const auto& table : counts_) {
    json obj = json::object();
    for (const auto& [ngram, count] : table) obj[ngram] = count;
    tables.push_back(std::move(obj));
  }
  doc["counts"] = tables;
  AtomicFile file(path);
  file.stream() << doc.dump() << '\n';
  file.commit();
}

NgramLm NgramLm::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open language model file: " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("language model file " + path + ": " + e.what());
  }
  if (doc.value("format", "") != "pseudoqe-ngram-v1") {
    throw ValidationError("language model file " + path +
                          ": unknown format tag");
  }
  NgramLm lm;
  lm.order_ = doc.at("order").get<std::size_t>();
  lm.backoff_factor_ = doc.at("backoff").get<double>();
  lm.total_tokens_ = doc.at("total_tokens").get<std::uint64_t>();
  std::set<std::string> vocab;
  for (const auto& table : doc.at("counts")) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [ngram, count] : table.items()) {
      counts[ngram] = count.get<std::uint64_t>();
    }
    lm.counts_.push_back(std::move(counts));
  }
  if (lm.counts_.size() != lm.order_) {
    throw ValidationError("language model file " + path +
                          ": table count does not match order");
  }
  for (const auto& [ngram, count] : lm.counts_[0]) {
    if (ngram != kSentenceStart) vocab.insert(ngram);
  }
  lm.vocab_.assign(vocab.begin(), vocab.end());
  return lm;
}

CandidateSet NgramSampler::top_k(const FillRequest& request, std::size_t k) {
  if (request.position >= request.context.size()) {
    throw ValidationError("fill request: position out of range");
  }
  // Left context, padded with start markers up to order-1.
  std::vector<std::string> context;
  const std::size_t want = lm_->order() - 1;
  const std::size_t have = std::min(want, request.position);
  for (std::size_t i = 0; i < want - have; ++i) {
    context.emplace_back(kSentenceStart);
  }
  for (std::size_t i = request.position - have; i < request.position; ++i) {
    context.push_back(request.context[i]);
  }

  auto dist = lm_->distribution(context);
  std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (dist.size() > k) dist.resize(k);

  CandidateSet out;
  for (auto& [word, p] : dist) {
    if (p <= 0.0) break;
    out.tokens.push_back(std::move(word));
    out.probs.push_back(p);
  }
  return out;
}

}  // namespace pseudoqe
