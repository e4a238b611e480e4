#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pseudoqe/corpus.hpp"
#include "pseudoqe/predictions.hpp"
#include "pseudoqe/rng.hpp"

namespace pseudoqe {

// Desk-scale stand-in for a pretrained transformer backbone: a fixed,
// deterministic hashed-feature encoder. Only the two heads are trainable, so
// "pre-train then fine-tune" transfers head parameters exactly as it would
// with a shared backbone.
struct EncoderConfig {
  std::size_t dim = 128;
  std::size_t window = 1;  // neighbor words folded into each position
  std::uint64_t hash_seed = 1;
  bool char_trigrams = true;

  bool operator==(const EncoderConfig&) const = default;
};

// n x dim word representations for the target tokens. Each word vector is
// the mean of its hashed character-trigram embeddings (or one hashed
// whole-word embedding), plus one hashed embedding per neighbor inside the
// window, plus the mean source-word embedding added to every position.
// Every hashed embedding has unit norm before pooling.
using FeatureMatrix = std::vector<std::vector<double>>;
FeatureMatrix encode(const QESample& sample, const EncoderConfig& config);

enum class ScoreActivation : std::uint8_t { Sigmoid = 0, None = 1 };

ScoreActivation activation_from_name(std::string_view name);
std::string_view activation_name(ScoreActivation activation);

// Trainable parameters: sentence score head and binary tag head over the
// fixed features. Dropout applies to head inputs during training only.
struct ModelParams {
  std::vector<double> score_w;
  double score_b = 0.0;
  std::vector<double> tag_w_ok;
  std::vector<double> tag_w_bad;
  double tag_b_ok = 0.0;
  double tag_b_bad = 0.0;
  ScoreActivation activation = ScoreActivation::Sigmoid;
  double dropout = 0.0;

  std::size_t dim() const { return score_w.size(); }
};

// Small uniform weights in (-0.1, 0.1), zero biases.
ModelParams init_params(std::size_t dim, ScoreActivation activation,
                        double dropout, Rng& rng);

// score = activation(score_w . mean(features) + score_b);
// ok_probs[i] = softmax(tag logits at i)[OK]. Inference path, no dropout.
Prediction forward(const FeatureMatrix& features, const ModelParams& params);

// Margin ranking loss for one ordered pair with distinct gold scores:
// max(0, -r (pred_i - pred_j) + margin), r = sign(gold_i - gold_j).
double loss_rank(double pred_i, double pred_j, double gold_i, double gold_j,
                 double margin);

struct Gradients {
  std::vector<double> score_w;
  double score_b = 0.0;
  std::vector<double> tag_w_ok;
  std::vector<double> tag_w_bad;
  double tag_b_ok = 0.0;
  double tag_b_bad = 0.0;
};

struct LossBreakdown {
  double total = 0.0;
  double ce = 0.0;
  double mse = 0.0;
  double rank = 0.0;
};

// Multi-task batch loss: CE + alpha * MSE + beta * Rank.
//   CE:   per-sentence sum of token cross-entropies, averaged over the batch.
//   MSE:  batch mean of squared score errors (targets already normalized by
//         the caller when the sigmoid head is used).
//   Rank: mean hinge over all ordered pairs with distinct gold scores; zero
//         when no such pair exists.
// dropout_rng enables dropout (training path); gradients for every head
// parameter are written to *grads when non-null. Throws DivergenceError on a
// non-finite loss.
LossBreakdown qe_loss(const std::vector<const FeatureMatrix*>& features,
                      const std::vector<const WordTagSeq*>& tags,
                      std::span<const double> gold_scores,
                      const ModelParams& params, double alpha, double beta,
                      double margin, Rng* dropout_rng, Gradients* grads);

struct TrainConfig {
  double alpha = 1.0;
  double beta = 1000.0;
  double margin = 0.03;
  double learning_rate = 0.05;
  double dropout = 0.0;
  ScoreActivation activation = ScoreActivation::Sigmoid;
  std::size_t batch_size = 32;
  std::size_t eval_interval = 50;  // updates between validation runs
  std::size_t patience = 10;       // non-improving evaluations before stopping
  std::size_t max_epochs = 50;
  std::uint64_t seed = 1;
};

// Min-max constants mapping raw MQM scores onto [0, 1] for the sigmoid head.
// Raw scores can be negative, so they are normalized per training corpus and
// the constants travel with the checkpoint.
struct NormConstants {
  double min = 0.0;
  double max = 1.0;

  double normalize(double value) const;
  double denormalize(double value) const;
};

struct Checkpoint {
  EncoderConfig encoder;
  ModelParams params;
  std::optional<NormConstants> norm;  // present iff the sigmoid head is used
};

// Versioned JSON document; round-trips exactly.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct EvalPoint {
  std::size_t updates = 0;
  double train_loss = 0.0;
  double valid_spearman = 0.0;
  double valid_mcc = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;  // parameters of the best evaluation
  std::vector<EvalPoint> history;
  double best_spearman = 0.0;
};

// Mini-batch gradient descent on the heads. Evaluates sentence Spearman and
// word MCC on the validation set every eval_interval updates, keeps the best
// parameters by Spearman and stops after `patience` evaluations without
// improvement. Fine-tuning passes the previous checkpoint as `init`; its
// parameters are the starting point and normalization constants are
// recomputed on the new training corpus.
TrainResult train(const std::vector<QESample>& train_set,
                  const std::vector<QESample>& valid_set,
                  const EncoderConfig& encoder, const TrainConfig& config,
                  const Checkpoint* init = nullptr);

// Inference for one sample; scores are de-normalized back to the MQM scale
// when the checkpoint carries normalization constants.
Prediction predict(const QESample& sample, const Checkpoint& checkpoint);

std::vector<PredictionRecord> predict_all(const std::vector<QESample>& samples,
                                          const Checkpoint& checkpoint,
                                          std::size_t jobs = 1);

}  // namespace pseudoqe
