#include "pseudoqe/qe_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"
#include "pseudoqe/metrics.hpp"
#include "pseudoqe/utf8.hpp"

namespace pseudoqe {

using json = nlohmann::ordered_json;

namespace {

constexpr double kProbFloor = 1e-12;

// Adds the unit-norm hashed embedding of key (components +-1/sqrt(d)) scaled
// by weight.
void add_hashed(std::vector<double>& acc, std::uint64_t hash_seed,
                const std::string& key, double weight) {
  const std::size_t d = acc.size();
  Rng rng(stable_hash(hash_seed, key));
  const double unit = weight / std::sqrt(static_cast<double>(d));
  std::uint64_t bits = 0;
  int remaining = 0;
  for (std::size_t i = 0; i < d; ++i) {
    if (remaining == 0) {
      bits = rng.next_u64();
      remaining = 64;
    }
    acc[i] += (bits & 1u) ? unit : -unit;
    bits >>= 1;
    --remaining;
  }
}

// Code-point trigrams of '#' + token + '#'.
std::vector<std::string> char_trigrams(const std::string& token) {
  std::vector<std::string> points;
  points.emplace_back("#");
  const std::size_t n = utf8_length(token);
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back(utf8_substr(token, i, i + 1));
  }
  points.emplace_back("#");

  std::vector<std::string> trigrams;
  for (std::size_t i = 0; i + 3 <= points.size(); ++i) {
    trigrams.push_back(points[i] + points[i + 1] + points[i + 2]);
  }
  return trigrams;
}

inline double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

FeatureMatrix encode(const QESample& sample, const EncoderConfig& config) {
  if (config.dim < 2) {
    throw ValidationError("encoder: dim must be at least 2");
  }
  const std::vector<std::string>& tokens = sample.translation.tokens;
  if (tokens.empty()) {
    throw ValidationError("encoder: empty translation in record '" +
                          sample.id + "'");
  }

  // Source folds in as one mean-pooled vector shared by every position.
  const std::vector<std::string> source_tokens =
      tokenize(sample.source).tokens;
  std::vector<double> source_vec(config.dim, 0.0);
  if (!source_tokens.empty()) {
    const double w = 1.0 / static_cast<double>(source_tokens.size());
    for (const std::string& tok : source_tokens) {
      add_hashed(source_vec, config.hash_seed, "s:" + tok, w);
    }
  }

  FeatureMatrix features(tokens.size());
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    std::vector<double> vec(config.dim, 0.0);
    if (config.char_trigrams) {
      const std::vector<std::string> trigrams = char_trigrams(tokens[j]);
      const double w = 1.0 / static_cast<double>(trigrams.size());
      for (const std::string& tri : trigrams) {
        add_hashed(vec, config.hash_seed, "t:" + tri, w);
      }
    } else {
      add_hashed(vec, config.hash_seed, "w:" + tokens[j], 1.0);
    }
    for (std::size_t o = 1; o <= config.window; ++o) {
      if (j >= o) {
        add_hashed(vec, config.hash_seed,
                   "c-" + std::to_string(o) + ":" + tokens[j - o], 1.0);
      }
      if (j + o < tokens.size()) {
        add_hashed(vec, config.hash_seed,
                   "c+" + std::to_string(o) + ":" + tokens[j + o], 1.0);
      }
    }
    for (std::size_t i = 0; i < config.dim; ++i) vec[i] += source_vec[i];
    features[j] = std::move(vec);
  }
  return features;
}

ScoreActivation activation_from_name(std::string_view name) {
  if (name == "sigmoid") return ScoreActivation::Sigmoid;
  if (name == "none") return ScoreActivation::None;
  throw ValidationError("unknown activation: '" + std::string(name) + "'");
}

std::string_view activation_name(ScoreActivation activation) {
  return activation == ScoreActivation::Sigmoid ? "sigmoid" : "none";
}

ModelParams init_params(std::size_t dim, ScoreActivation activation,
                        double dropout, Rng& rng) {
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ValidationError("dropout rate must be in [0, 1)");
  }
  ModelParams params;
  params.activation = activation;
  params.dropout = dropout;
  auto draw = [&rng] { return rng.next_double() * 0.2 - 0.1; };
  params.score_w.resize(dim);
  params.tag_w_ok.resize(dim);
  params.tag_w_bad.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) params.score_w[i] = draw();
  for (std::size_t i = 0; i < dim; ++i) params.tag_w_ok[i] = draw();
  for (std::size_t i = 0; i < dim; ++i) params.tag_w_bad[i] = draw();
  return params;
}

Prediction forward(const FeatureMatrix& features, const ModelParams& params) {
  const std::size_t n = features.size();
  if (n == 0) {
    throw ValidationError("forward: no token features");
  }
  const std::size_t d = params.dim();
  std::vector<double> sent(d, 0.0);
  for (const auto& row : features) {
    for (std::size_t i = 0; i < d; ++i) sent[i] += row[i];
  }
  for (double& v : sent) v /= static_cast<double>(n);

  Prediction pred;
  const double z = dot(params.score_w, sent) + params.score_b;
  pred.score = params.activation == ScoreActivation::Sigmoid ? sigmoid(z) : z;
  pred.ok_probs.reserve(n);
  for (const auto& row : features) {
    const double ok_logit = dot(params.tag_w_ok, row) + params.tag_b_ok;
    const double bad_logit = dot(params.tag_w_bad, row) + params.tag_b_bad;
    pred.ok_probs.push_back(sigmoid(ok_logit - bad_logit));
  }
  return pred;
}

double loss_rank(double pred_i, double pred_j, double gold_i, double gold_j,
                 double margin) {
  if (gold_i == gold_j) {
    throw ValidationError("loss_rank: gold scores must differ");
  }
  const double r = gold_i > gold_j ? 1.0 : -1.0;
  return std::max(0.0, -r * (pred_i - pred_j) + margin);
}

namespace {

// Inverted dropout on a copy of the input row. rate 0 draws nothing and
// returns the row unchanged.
std::vector<double> apply_dropout(const std::vector<double>& row, double rate,
                                  Rng* rng) {
  if (rng == nullptr || rate <= 0.0) return row;
  std::vector<double> out(row.size());
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < row.size(); ++i) {
    out[i] = rng->next_double() < rate ? 0.0 : row[i] * scale;
  }
  return out;
}

}  // namespace

LossBreakdown qe_loss(const std::vector<const FeatureMatrix*>& features,
                      const std::vector<const WordTagSeq*>& tags,
                      std::span<const double> gold_scores,
                      const ModelParams& params, double alpha, double beta,
                      double margin, Rng* dropout_rng, Gradients* grads) {
  const std::size_t batch = features.size();
  if (batch == 0 || tags.size() != batch || gold_scores.size() != batch) {
    throw ValidationError("qe_loss: inconsistent batch inputs");
  }
  const std::size_t d = params.dim();
  const double inv_batch = 1.0 / static_cast<double>(batch);

  if (grads != nullptr) {
    grads->score_w.assign(d, 0.0);
    grads->score_b = 0.0;
    grads->tag_w_ok.assign(d, 0.0);
    grads->tag_w_bad.assign(d, 0.0);
    grads->tag_b_ok = 0.0;
    grads->tag_b_bad = 0.0;
  }

  LossBreakdown loss;
  std::vector<std::vector<double>> sent_inputs(batch);
  std::vector<double> score_z(batch, 0.0);
  std::vector<double> pred_scores(batch, 0.0);

  for (std::size_t s = 0; s < batch; ++s) {
    const FeatureMatrix& rows = *features[s];
    const WordTagSeq& gold = *tags[s];
    if (rows.empty() || gold.size() != rows.size()) {
      throw ValidationError("qe_loss: tags do not match features in sample " +
                            std::to_string(s));
    }

    std::vector<double> sent(d, 0.0);
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < d; ++i) sent[i] += row[i];
    }
    for (double& v : sent) v /= static_cast<double>(rows.size());
    sent_inputs[s] = apply_dropout(sent, params.dropout, dropout_rng);

    score_z[s] = dot(params.score_w, sent_inputs[s]) + params.score_b;
    pred_scores[s] = params.activation == ScoreActivation::Sigmoid
                         ? sigmoid(score_z[s])
                         : score_z[s];

    // Token cross-entropy: per-sentence sum; gradients are independent of
    // the other samples, so they accumulate in this pass.
    double ce = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const std::vector<double> x =
          apply_dropout(rows[t], params.dropout, dropout_rng);
      const double ok_logit = dot(params.tag_w_ok, x) + params.tag_b_ok;
      const double bad_logit = dot(params.tag_w_bad, x) + params.tag_b_bad;
      const double p_ok = sigmoid(ok_logit - bad_logit);
      const bool is_ok = gold[t] == Tag::Ok;
      const double p_gold = is_ok ? p_ok : 1.0 - p_ok;
      ce -= std::log(std::max(p_gold, kProbFloor));
      if (grads != nullptr) {
        const double d_ok = (p_ok - (is_ok ? 1.0 : 0.0)) * inv_batch;
        for (std::size_t i = 0; i < d; ++i) {
          grads->tag_w_ok[i] += d_ok * x[i];
          grads->tag_w_bad[i] -= d_ok * x[i];
        }
        grads->tag_b_ok += d_ok;
        grads->tag_b_bad -= d_ok;
      }
    }
    loss.ce += ce * inv_batch;

    const double err = pred_scores[s] - gold_scores[s];
    loss.mse += err * err * inv_batch;
  }

  // Margin ranking over all ordered pairs with distinct gold scores.
  std::vector<double> d_pred(batch, 0.0);
  std::size_t pair_count = 0;
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t j = 0; j < batch; ++j) {
      if (i == j || gold_scores[i] == gold_scores[j]) continue;
      ++pair_count;
    }
  }
  if (pair_count > 0) {
    const double inv_pairs = 1.0 / static_cast<double>(pair_count);
    for (std::size_t i = 0; i < batch; ++i) {
      for (std::size_t j = 0; j < batch; ++j) {
        if (i == j || gold_scores[i] == gold_scores[j]) continue;
        const double r = gold_scores[i] > gold_scores[j] ? 1.0 : -1.0;
        const double hinge =
            -r * (pred_scores[i] - pred_scores[j]) + margin;
        if (hinge > 0.0) {
          loss.rank += hinge * inv_pairs;
          d_pred[i] += -r * inv_pairs;
          d_pred[j] += r * inv_pairs;
        }
      }
    }
  }

  if (grads != nullptr) {
    for (std::size_t s = 0; s < batch; ++s) {
      const double d_mse = 2.0 * (pred_scores[s] - gold_scores[s]) * inv_batch;
      const double d_score = alpha * d_mse + beta * d_pred[s];
      const double act_grad =
          params.activation == ScoreActivation::Sigmoid
              ? pred_scores[s] * (1.0 - pred_scores[s])
              : 1.0;
      const double dz = d_score * act_grad;
      for (std::size_t i = 0; i < d; ++i) {
        grads->score_w[i] += dz * sent_inputs[s][i];
      }
      grads->score_b += dz;
    }
  }

  loss.total = loss.ce + alpha * loss.mse + beta * loss.rank;
  if (!std::isfinite(loss.total)) {
    throw DivergenceError("qe_loss: non-finite loss");
  }
  return loss;
}

double NormConstants::normalize(double value) const {
  if (max == min) return 0.5;
  return (value - min) / (max - min);
}

double NormConstants::denormalize(double value) const {
  if (max == min) return min;
  return value * (max - min) + min;
}

namespace {

json params_to_json(const ModelParams& params) {
  json obj;
  obj["activation"] = activation_name(params.activation);
  obj["dropout"] = params.dropout;
  obj["score_w"] = params.score_w;
  obj["score_b"] = params.score_b;
  obj["tag_w_ok"] = params.tag_w_ok;
  obj["tag_w_bad"] = params.tag_w_bad;
  obj["tag_b_ok"] = params.tag_b_ok;
  obj["tag_b_bad"] = params.tag_b_bad;
  return obj;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  json doc;
  doc["format"] = "pseudoqe-checkpoint-v1";
  json enc;
  enc["dim"] = checkpoint.encoder.dim;
  enc["window"] = checkpoint.encoder.window;
  enc["hash_seed"] = checkpoint.encoder.hash_seed;
  enc["char_trigrams"] = checkpoint.encoder.char_trigrams;
  doc["encoder"] = enc;
  doc["params"] = params_to_json(checkpoint.params);
  if (checkpoint.norm) {
    doc["norm"] = {{"min", checkpoint.norm->min}, {"max", checkpoint.norm->max}};
  } else {
    doc["norm"] = nullptr;
  }
  AtomicFile file(path);
  file.stream() << doc.dump() << '\n';
  file.commit();
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open checkpoint: " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint " + path + ": " + e.what());
  }
  if (doc.value("format", "") != "pseudoqe-checkpoint-v1") {
    throw ValidationError("checkpoint " + path + ": unknown format tag");
  }
  Checkpoint checkpoint;
  const json& enc = doc.at("encoder");
  checkpoint.encoder.dim = enc.at("dim").get<std::size_t>();
  checkpoint.encoder.window = enc.at("window").get<std::size_t>();
  checkpoint.encoder.hash_seed = enc.at("hash_seed").get<std::uint64_t>();
  checkpoint.encoder.char_trigrams = enc.at("char_trigrams").get<bool>();
  const json& p = doc.at("params");
  checkpoint.params.activation =
      activation_from_name(p.at("activation").get<std::string>());
  checkpoint.params.dropout = p.at("dropout").get<double>();
  checkpoint.params.score_w = p.at("score_w").get<std::vector<double>>();
  checkpoint.params.score_b = p.at("score_b").get<double>();
  checkpoint.params.tag_w_ok = p.at("tag_w_ok").get<std::vector<double>>();
  checkpoint.params.tag_w_bad = p.at("tag_w_bad").get<std::vector<double>>();
  checkpoint.params.tag_b_ok = p.at("tag_b_ok").get<double>();
  checkpoint.params.tag_b_bad = p.at("tag_b_bad").get<double>();
  if (!doc.at("norm").is_null()) {
    checkpoint.norm = NormConstants{doc.at("norm").at("min").get<double>(),
                                    doc.at("norm").at("max").get<double>()};
  }
  if (checkpoint.params.tag_w_ok.size() != checkpoint.encoder.dim ||
      checkpoint.params.score_w.size() != checkpoint.encoder.dim) {
    throw ValidationError("checkpoint " + path +
                          ": parameter size does not match encoder dim");
  }
  return checkpoint;
}

namespace {

struct EncodedSet {
  std::vector<FeatureMatrix> features;
  std::vector<WordTagSeq> tags;
  std::vector<double> scores;  // raw
};

EncodedSet encode_set(const std::vector<QESample>& samples,
                      const EncoderConfig& encoder, const char* role,
                      bool need_tags) {
  EncodedSet set;
  set.features.reserve(samples.size());
  for (const QESample& sample : samples) {
    if (!sample.mqm) {
      throw ValidationError(std::string(role) + " record '" + sample.id +
                            "' has no score");
    }
    if (need_tags && !sample.tags) {
      throw ValidationError(std::string(role) + " record '" + sample.id +
                            "' has no tags");
    }
    set.features.push_back(encode(sample, encoder));
    set.tags.push_back(sample.tags.value_or(WordTagSeq{}));
    set.scores.push_back(*sample.mqm);
  }
  return set;
}

struct ValidMetrics {
  double spearman_value;
  double mcc_value;
};

ValidMetrics evaluate_on(const EncodedSet& valid, const ModelParams& params) {
  std::vector<double> pred_scores;
  std::vector<WordTagSeq> pred_tags;
  pred_scores.reserve(valid.features.size());
  for (const FeatureMatrix& rows : valid.features) {
    const Prediction pred = forward(rows, params);
    pred_scores.push_back(pred.score);
    WordTagSeq tags;
    tags.reserve(pred.ok_probs.size());
    for (const double p : pred.ok_probs) {
      tags.push_back(p > 0.5 ? Tag::Ok : Tag::Bad);
    }
    pred_tags.push_back(std::move(tags));
  }
  ValidMetrics metrics{};
  try {
    metrics.spearman_value = spearman(pred_scores, valid.scores);
  } catch (const ValidationError&) {
    // Constant predictions early in training: rank correlation is undefined,
    // score it as the worst possible value instead of aborting the run.
    metrics.spearman_value = -1.0;
  }
  metrics.mcc_value = mcc(pred_tags, valid.tags);
  return metrics;
}

void sgd_step(ModelParams& params, const Gradients& grads, double lr) {
  const std::size_t d = params.dim();
  for (std::size_t i = 0; i < d; ++i) {
    params.score_w[i] -= lr * grads.score_w[i];
    params.tag_w_ok[i] -= lr * grads.tag_w_ok[i];
    params.tag_w_bad[i] -= lr * grads.tag_w_bad[i];
  }
  params.score_b -= lr * grads.score_b;
  params.tag_b_ok -= lr * grads.tag_b_ok;
  params.tag_b_bad -= lr * grads.tag_b_bad;
}

}  // namespace

TrainResult train(const std::vector<QESample>& train_set,
                  const std::vector<QESample>& valid_set,
                  const EncoderConfig& encoder, const TrainConfig& config,
                  const Checkpoint* init) {
  if (train_set.empty() || valid_set.empty()) {
    throw ValidationError("train: empty training or validation set");
  }
  if (config.patience == 0 || config.batch_size == 0 ||
      config.eval_interval == 0) {
    throw ValidationError("train: patience, batch size and eval interval "
                          "must be positive");
  }
  if (config.alpha < 0.0 || config.beta < 0.0 || config.margin < 0.0) {
    throw ValidationError("train: alpha, beta and margin must not be negative");
  }
  if (config.dropout < 0.0 || config.dropout >= 1.0) {
    throw ValidationError("train: dropout rate must be in [0, 1)");
  }
  if (init != nullptr && !(init->encoder == encoder)) {
    throw ValidationError(
        "train: encoder config differs from the initial checkpoint");
  }

  const EncodedSet train_enc = encode_set(train_set, encoder, "training", true);
  const EncodedSet valid_enc =
      encode_set(valid_set, encoder, "validation", true);

  Rng rng(config.seed);
  ModelParams params;
  if (init != nullptr) {
    params = init->params;
    params.dropout = config.dropout;  // dropout is a training-time setting
  } else {
    params = init_params(encoder.dim, config.activation, config.dropout, rng);
  }

  // Sigmoid predictions live in (0,1): min-max normalize raw targets over
  // this training corpus.
  std::optional<NormConstants> norm;
  std::vector<double> targets = train_enc.scores;
  if (params.activation == ScoreActivation::Sigmoid) {
    const auto [lo, hi] =
        std::minmax_element(train_enc.scores.begin(), train_enc.scores.end());
    norm = NormConstants{*lo, *hi};
    for (double& t : targets) t = norm->normalize(t);
  }

  TrainResult result;
  result.best_spearman = -2.0;
  std::size_t updates = 0;
  std::size_t evals_since_best = 0;
  ModelParams best_params = params;
  bool stop = false;
  double running_loss = 0.0;
  std::size_t running_count = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  auto run_eval = [&]() {
    const ValidMetrics metrics = evaluate_on(valid_enc, params);
    const double avg_loss =
        running_count > 0 ? running_loss / static_cast<double>(running_count)
                          : 0.0;
    result.history.push_back(
        {updates, avg_loss, metrics.spearman_value, metrics.mcc_value});
    running_loss = 0.0;
    running_count = 0;
    if (metrics.spearman_value > result.best_spearman) {
      result.best_spearman = metrics.spearman_value;
      best_params = params;
      evals_since_best = 0;
    } else {
      ++evals_since_best;
      if (evals_since_best >= config.patience) stop = true;
    }
  };

  for (std::size_t epoch = 0; epoch < config.max_epochs && !stop; ++epoch) {
    // Fisher-Yates with the run's own stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const std::size_t j = rng.index(i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t begin = 0; begin < order.size() && !stop;
         begin += config.batch_size) {
      const std::size_t end =
          std::min(begin + config.batch_size, order.size());
      std::vector<const FeatureMatrix*> batch_features;
      std::vector<const WordTagSeq*> batch_tags;
      std::vector<double> batch_scores;
      for (std::size_t i = begin; i < end; ++i) {
        batch_features.push_back(&train_enc.features[order[i]]);
        batch_tags.push_back(&train_enc.tags[order[i]]);
        batch_scores.push_back(targets[order[i]]);
      }
      Gradients grads;
      const LossBreakdown loss =
          qe_loss(batch_features, batch_tags, batch_scores, params,
                  config.alpha, config.beta, config.margin,
                  params.dropout > 0.0 ? &rng : nullptr, &grads);
      sgd_step(params, grads, config.learning_rate);
      running_loss += loss.total;
      ++running_count;
      ++updates;
      if (updates % config.eval_interval == 0) {
        run_eval();
      }
    }
  }
  if (result.history.empty()) {
    run_eval();
  }

  result.checkpoint.encoder = encoder;
  result.checkpoint.params = std::move(best_params);
  result.checkpoint.norm = norm;
  return result;
}

Prediction predict(const QESample& sample, const Checkpoint& checkpoint) {
  Prediction pred =
      forward(encode(sample, checkpoint.encoder), checkpoint.params);
  if (checkpoint.norm) {
    pred.score = checkpoint.norm->denormalize(pred.score);
  }
  return pred;
}

std::vector<PredictionRecord> predict_all(const std::vector<QESample>& samples,
                                          const Checkpoint& checkpoint,
                                          std::size_t jobs) {
  std::vector<PredictionRecord> records(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    records[i] = {samples[i].id, predict(samples[i], checkpoint)};
  });
  return records;
}

}  // namespace pseudoqe
