#include <memory>
#include <string>

#include <json.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "pseudoqe/corpus.hpp"
#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"
#include "pseudoqe/qe_model.hpp"

namespace pseudoqe::cli {

namespace {

using json = nlohmann::ordered_json;

json history_to_json(const std::vector<EvalPoint>& history) {
  json arr = json::array();
  for (const EvalPoint& point : history) {
    json entry;
    entry["updates"] = point.updates;
    entry["train_loss"] = point.train_loss;
    entry["valid_spearman"] = point.valid_spearman;
    entry["valid_mcc"] = point.valid_mcc;
    arr.push_back(std::move(entry));
  }
  return arr;
}

void register_train_qe(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "train-qe", "Train the joint sentence/word QE model");
  struct Opts {
    std::string pretrain_data;
    std::string finetune_data;
    std::string valid;
    std::string out;
    std::string history;
    double alpha = 1.0;
    double beta = 1000.0;
    double margin = 0.03;
    std::string sigma = "sigmoid";
    double dropout = 0.0;
    double learning_rate = 0.05;
    std::size_t batch_size = 32;
    std::size_t eval_interval = 50;
    std::size_t patience = 10;
    std::size_t max_epochs = 50;
    std::uint64_t seed = 1;
    std::size_t dim = 128;
    std::size_t window = 1;
    bool no_char_trigrams = false;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--pretrain-data", opts->pretrain_data,
                  "pseudo QE data for the pre-training stage");
  cmd->add_option("--finetune-data", opts->finetune_data,
                  "real QE data for the fine-tuning stage");
  cmd->add_option("--valid", opts->valid, "validation set with scores and tags")
      ->required();
  cmd->add_option("--out", opts->out, "output checkpoint")->required();
  cmd->add_option("--history", opts->history,
                  "optional JSON file with per-stage training history");
  cmd->add_option("--alpha", opts->alpha, "weight of the MSE loss")
      ->capture_default_str();
  cmd->add_option("--beta", opts->beta, "weight of the margin ranking loss")
      ->capture_default_str();
  cmd->add_option("--margin", opts->margin, "ranking margin")
      ->capture_default_str();
  cmd->add_option("--sigma", opts->sigma,
                  "score activation: sigmoid or none")
      ->capture_default_str();
  cmd->add_option("--dropout", opts->dropout, "output-layer dropout rate")
      ->capture_default_str();
  cmd->add_option("--lr", opts->learning_rate, "learning rate")
      ->capture_default_str();
  cmd->add_option("--batch-size", opts->batch_size, "sentences per batch")
      ->capture_default_str();
  cmd->add_option("--eval-interval", opts->eval_interval,
                  "updates between validations")
      ->capture_default_str();
  cmd->add_option("--patience", opts->patience,
                  "non-improving validations before stopping")
      ->capture_default_str();
  cmd->add_option("--max-epochs", opts->max_epochs, "epoch cap per stage")
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "random seed")->capture_default_str();
  cmd->add_option("--dim", opts->dim, "encoder dimension")
      ->capture_default_str();
  cmd->add_option("--window", opts->window, "neighbor window")
      ->capture_default_str();
  cmd->add_flag("--no-char-trigrams", opts->no_char_trigrams,
                "hash whole words instead of character trigrams");

  cmd->callback([opts, cmd] {
    if (opts->pretrain_data.empty() && opts->finetune_data.empty()) {
      throw ValidationError(
          "train-qe: pass --pretrain-data and/or --finetune-data");
    }
    require_input(opts->valid, "validation set");
    RunLog log(opts->out, "train-qe");
    log.config(cmd->config_to_str(true, false), opts->seed);

    EncoderConfig encoder;
    encoder.dim = opts->dim;
    encoder.window = opts->window;
    encoder.char_trigrams = !opts->no_char_trigrams;

    TrainConfig config;
    config.alpha = opts->alpha;
    config.beta = opts->beta;
    config.margin = opts->margin;
    config.activation = activation_from_name(opts->sigma);
    config.dropout = opts->dropout;
    config.learning_rate = opts->learning_rate;
    config.batch_size = opts->batch_size;
    config.eval_interval = opts->eval_interval;
    config.patience = opts->patience;
    config.max_epochs = opts->max_epochs;
    config.seed = opts->seed;

    const std::vector<QESample> valid = read_qe_jsonl(opts->valid);

    json history;
    Checkpoint checkpoint;
    bool have_checkpoint = false;
    if (!opts->pretrain_data.empty()) {
      require_input(opts->pretrain_data, "pre-training data");
      StageTimer timer;
      const std::vector<QESample> data = read_qe_jsonl(opts->pretrain_data);
      TrainResult result = train(data, valid, encoder, config);
      checkpoint = std::move(result.checkpoint);
      have_checkpoint = true;
      history["pretrain"] = history_to_json(result.history);
      log.stage("pretrain", data.size(), timer.elapsed_ms());
    }
    if (!opts->finetune_data.empty()) {
      require_input(opts->finetune_data, "fine-tuning data");
      StageTimer timer;
      const std::vector<QESample> data = read_qe_jsonl(opts->finetune_data);
      TrainResult result = train(data, valid, encoder, config,
                                 have_checkpoint ? &checkpoint : nullptr);
      checkpoint = std::move(result.checkpoint);
      history["finetune"] = history_to_json(result.history);
      log.stage("finetune", data.size(), timer.elapsed_ms());
    }
    save_checkpoint(checkpoint, opts->out);
    if (!opts->history.empty()) {
      AtomicFile file(opts->history);
      file.stream() << history.dump(2) << '\n';
      file.commit();
    }
  });
}

void register_predict(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "predict", "Write sentence scores and OK probabilities for a dataset");
  struct Opts {
    std::string model;
    std::string data;
    std::string out;
    std::size_t jobs = 1;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--model", opts->model, "trained checkpoint")->required();
  cmd->add_option("--data", opts->data, "QE dataset to score")->required();
  cmd->add_option("--out", opts->out, "output prediction file")->required();
  cmd->add_option("--jobs", opts->jobs, "parallel workers")
      ->capture_default_str();

  cmd->callback([opts, cmd] {
    require_input(opts->model, "checkpoint");
    require_input(opts->data, "QE dataset");
    RunLog log(opts->out, "predict");
    log.config(cmd->config_to_str(true, false), 0);
    StageTimer timer;
    const Checkpoint checkpoint = load_checkpoint(opts->model);
    const std::vector<QESample> samples = read_qe_jsonl(opts->data);
    const std::vector<PredictionRecord> records =
        predict_all(samples, checkpoint, opts->jobs);
    write_predictions(records, opts->out);
    log.stage("predict", records.size(), timer.elapsed_ms());
  });
}

}  // namespace

void register_model_commands(CLI::App& app) {
  register_train_qe(app);
  register_predict(app);
}

}  // namespace pseudoqe::cli
