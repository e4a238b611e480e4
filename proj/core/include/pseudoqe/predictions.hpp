#pragma once

#include <string>
#include <vector>

namespace pseudoqe {

// Per-sample model output: sentence score and one OK probability per token.
struct Prediction {
  double score = 0.0;
  std::vector<double> ok_probs;
};

struct PredictionRecord {
  std::string id;
  Prediction pred;
};

// Prediction file: one line per sample, id<TAB>score<TAB>p1 p2 ... pn.
std::vector<PredictionRecord> read_predictions(const std::string& path);
void write_predictions(const std::vector<PredictionRecord>& records,
                       const std::string& path);

}  // namespace pseudoqe
