#include <memory>
#include <string>
#include <vector>

#include "commands.hpp"
#include "common.hpp"
#include "pseudoqe/corpus.hpp"
#include "pseudoqe/corruptor.hpp"
#include "pseudoqe/error.hpp"
#include "pseudoqe/external_sampler.hpp"
#include "pseudoqe/fixer.hpp"
#include "pseudoqe/io.hpp"
#include "pseudoqe/ngram_lm.hpp"
#include "pseudoqe/stats.hpp"

namespace pseudoqe::cli {

namespace {

void register_gen_stats(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "gen-stats", "Write a corruption stats file (estimated or defaults)");
  struct Opts {
    std::string from;
    bool use_default = false;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  auto* from = cmd->add_option("--from", opts->from,
                               "annotated QE dataset to estimate from");
  auto* use_default = cmd->add_flag(
      "--default", opts->use_default,
      "write the synthetic default distributions instead of estimating");
  cmd->add_option("--out", opts->out, "output stats file")->required();
  from->excludes(use_default);

  cmd->callback([opts, cmd] {
    if (opts->from.empty() && !opts->use_default) {
      throw ValidationError("gen-stats: pass --from or --default");
    }
    RunLog log(opts->out, "gen-stats");
    log.config(cmd->config_to_str(true, false), 0);
    StageTimer timer;
    CorruptionStats stats;
    std::size_t records = 0;
    if (opts->use_default) {
      stats = default_stats();
    } else {
      require_input(opts->from, "QE dataset");
      const std::vector<QESample> samples = read_qe_jsonl(opts->from);
      records = samples.size();
      stats = estimate_stats(samples);
    }
    write_stats(stats, opts->out);
    log.stage("gen-stats", records, timer.elapsed_ms());
  });
}

void register_corrupt(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "corrupt", "Sample error spans over references and mask them");
  struct Opts {
    std::string pairs;
    std::string stats;
    std::string out;
    std::uint64_t seed = 1;
    double p_insert = 0.15;
    double p_delete = 0.15;
    std::size_t jobs = 1;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--pairs", opts->pairs, "parallel corpus (source<TAB>target)")
      ->required();
  cmd->add_option("--stats", opts->stats, "corruption stats file")->required();
  cmd->add_option("--out", opts->out, "output masked records")->required();
  cmd->add_option("--seed", opts->seed, "base random seed")
      ->capture_default_str();
  cmd->add_option("--p-insert", opts->p_insert,
                  "probability of an insertion edit per span")
      ->capture_default_str();
  cmd->add_option("--p-delete", opts->p_delete,
                  "probability of a deletion edit per span")
      ->capture_default_str();
  cmd->add_option("--jobs", opts->jobs, "parallel workers")
      ->capture_default_str();

  cmd->callback([opts, cmd] {
    require_input(opts->pairs, "parallel corpus");
    require_input(opts->stats, "stats file");
    RunLog log(opts->out, "corrupt");
    log.config(cmd->config_to_str(true, false), opts->seed);
    StageTimer timer;

    const CorruptionStats stats = read_stats(opts->stats);
    const std::vector<ParallelPair> pairs = read_parallel_tsv(opts->pairs);
    std::vector<MaskedRecord> records(pairs.size());
    parallel_for(pairs.size(), opts->jobs, [&](std::size_t i) {
      const std::string id = std::to_string(i + 1);
      const TokenizedText reference = tokenize(pairs[i].target);
      if (reference.size() == 0) {
        throw ValidationError("record '" + id + "': empty target side");
      }
      Rng rng = record_rng(opts->seed, id);
      const CorruptionPlan plan = plan_corruption(
          reference.size(), stats, {opts->p_insert, opts->p_delete}, rng);
      records[i] = {id, pairs[i].source,
                    apply_corruption(reference, plan, rng)};
    });
    write_masked_jsonl(records, opts->out);
    log.stage("corrupt", records.size(), timer.elapsed_ms());
  });
}

void register_fix(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "fix", "Fill mask symbols with sampled wrong tokens");
  struct Opts {
    std::string in;
    std::string out;
    std::string lm;
    std::string external_cmd;
    std::string mode = "l2r";
    std::size_t k_minor = 2;
    std::size_t k_major = 10;
    std::size_t k_critical = 100;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;
    std::size_t timeout_ms = 30000;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--in", opts->in, "masked records from corrupt")->required();
  cmd->add_option("--out", opts->out, "output QE dataset")->required();
  auto* lm = cmd->add_option("--lm", opts->lm, "n-gram language model file");
  auto* external = cmd->add_option("--external-cmd", opts->external_cmd,
                                   "external sampler command line");
  lm->excludes(external);
  cmd->add_option("--mode", opts->mode, "fill mode: l2r or parallel")
      ->capture_default_str();
  cmd->add_option("--k-minor", opts->k_minor, "top-k for minor spans")
      ->capture_default_str();
  cmd->add_option("--k-major", opts->k_major, "top-k for major spans")
      ->capture_default_str();
  cmd->add_option("--k-critical", opts->k_critical, "top-k for critical spans")
      ->capture_default_str();
  cmd->add_option("--seed", opts->seed, "base random seed")
      ->capture_default_str();
  cmd->add_option("--jobs", opts->jobs, "parallel workers")
      ->capture_default_str();
  cmd->add_option("--timeout-ms", opts->timeout_ms,
                  "external sampler response timeout")
      ->capture_default_str();

  cmd->callback([opts, cmd] {
    if (opts->lm.empty() && opts->external_cmd.empty()) {
      throw ValidationError("fix: pass --lm or --external-cmd");
    }
    require_input(opts->in, "masked records");
    RunLog log(opts->out, "fix");
    log.config(cmd->config_to_str(true, false), opts->seed);
    StageTimer timer;

    const FillMode mode = fill_mode_from_name(opts->mode);
    SeverityKMap kmap{opts->k_minor, opts->k_major, opts->k_critical};
    kmap.validate();
    const std::vector<MaskedRecord> records = read_masked_jsonl(opts->in);

    // One sampler per worker: the n-gram model is shared read-only, external
    // handles each own a subprocess.
    const std::size_t workers = std::max<std::size_t>(1, opts->jobs);
    std::vector<std::unique_ptr<Sampler>> samplers;
    NgramLm lm_model;
    if (!opts->lm.empty()) {
      require_input(opts->lm, "language model");
      lm_model = NgramLm::load(opts->lm);
      for (std::size_t w = 0; w < workers; ++w) {
        samplers.push_back(std::make_unique<NgramSampler>(lm_model));
      }
    } else {
      for (std::size_t w = 0; w < workers; ++w) {
        samplers.push_back(std::make_unique<ExternalSampler>(
            opts->external_cmd,
            std::chrono::milliseconds(opts->timeout_ms)));
      }
    }

    std::vector<QESample> filled(records.size());
    parallel_for(records.size(), opts->jobs, [&](std::size_t i) {
      Rng rng = record_rng(opts->seed, records[i].id);
      Sampler& sampler = *samplers[opts->jobs > 1 ? i % opts->jobs : 0];
      filled[i] = fill_masks(records[i], sampler, kmap, mode, rng);
    });
    write_qe_jsonl(filled, opts->out);
    log.stage("fix", filled.size(), timer.elapsed_ms());
  });
}

void register_train_lm(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "train-lm", "Count n-grams over the target side of a parallel corpus");
  struct Opts {
    std::string pairs;
    std::string out;
    std::size_t order = 3;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--pairs", opts->pairs, "parallel corpus (source<TAB>target)")
      ->required();
  cmd->add_option("--out", opts->out, "output language model file")
      ->required();
  cmd->add_option("--order", opts->order, "maximum n-gram order")
      ->capture_default_str();

  cmd->callback([opts, cmd] {
    require_input(opts->pairs, "parallel corpus");
    RunLog log(opts->out, "train-lm");
    log.config(cmd->config_to_str(true, false), 0);
    StageTimer timer;
    const std::vector<ParallelPair> pairs = read_parallel_tsv(opts->pairs);
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(pairs.size());
    for (const ParallelPair& pair : pairs) {
      corpus.push_back(tokenize(pair.target).tokens);
    }
    const NgramLm lm = NgramLm::train(corpus, opts->order);
    lm.save(opts->out);
    log.stage("train-lm", corpus.size(), timer.elapsed_ms());
  });
}

}  // namespace

void register_data_commands(CLI::App& app) {
  register_gen_stats(app);
  register_corrupt(app);
  register_fix(app);
  register_train_lm(app);
}

}  // namespace pseudoqe::cli
