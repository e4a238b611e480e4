#include "pseudoqe/predictions.hpp"

#include <sstream>

#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"

namespace pseudoqe {

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<PredictionRecord> records;
  records.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string context = path + ":" + std::to_string(i + 1);
    std::istringstream in(lines[i]);
    PredictionRecord record;
    std::string score_field;
    if (!std::getline(in, record.id, '\t') ||
        !std::getline(in, score_field, '\t')) {
      throw ValidationError(context + ": expected id<TAB>score<TAB>probs");
    }
    try {
      record.pred.score = std::stod(score_field);
    } catch (const std::exception&) {
      throw ValidationError(context + ": bad score '" + score_field + "'");
    }
    std::string probs_field;
    std::getline(in, probs_field);
    std::istringstream probs_in(probs_field);
    std::string p;
    while (probs_in >> p) {
      double value = 0.0;
      try {
        value = std::stod(p);
      } catch (const std::exception&) {
        throw ValidationError(context + ": bad probability '" + p + "'");
      }
      if (value < 0.0 || value > 1.0) {
        throw ValidationError(context + ": probability out of [0,1]: " + p);
      }
      record.pred.ok_probs.push_back(value);
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_predictions(const std::vector<PredictionRecord>& records,
                       const std::string& path) {
  AtomicFile file(path);
  for (const PredictionRecord& record : records) {
    file.stream() << record.id << '\t' << format_double(record.pred.score)
                  << '\t';
    for (std::size_t i = 0; i < record.pred.ok_probs.size(); ++i) {
      if (i > 0) file.stream() << ' ';
      file.stream() << format_double(record.pred.ok_probs[i]);
    }
    file.stream() << '\n';
  }
  file.commit();
}

}  // namespace pseudoqe
