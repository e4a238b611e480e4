#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "pseudoqe/corpus.hpp"
#include "pseudoqe/ensemble.hpp"
#include "pseudoqe/error.hpp"
#include "pseudoqe/io.hpp"
#include "pseudoqe/metrics.hpp"

namespace pseudoqe::cli {

namespace {

using json = nlohmann::ordered_json;

// Pairs every prediction with its dataset record, in prediction-file order.
struct Aligned {
  std::vector<const QESample*> samples;
  std::vector<PredictionRecord> preds;
};

Aligned align(const std::vector<PredictionRecord>& preds,
              const std::vector<QESample>& samples, bool check_tokens) {
  std::map<std::string, const QESample*> by_id;
  for (const QESample& sample : samples) {
    if (!by_id.emplace(sample.id, &sample).second) {
      throw ValidationError("duplicate record id '" + sample.id +
                            "' in the dataset");
    }
  }
  Aligned out;
  for (const PredictionRecord& pred : preds) {
    const auto it = by_id.find(pred.id);
    if (it == by_id.end()) {
      throw ValidationError("prediction for unknown record id '" + pred.id +
                            "'");
    }
    if (check_tokens &&
        pred.pred.ok_probs.size() != it->second->translation.size()) {
      throw ValidationError(
          "record '" + pred.id + "': " +
          std::to_string(pred.pred.ok_probs.size()) + " probabilities for " +
          std::to_string(it->second->translation.size()) + " tokens");
    }
    out.samples.push_back(it->second);
    out.preds.push_back(pred);
  }
  return out;
}

void emit_report(const json& report, const std::string& out_path) {
  std::cout << report.dump() << '\n';
  if (!out_path.empty()) {
    AtomicFile file(out_path);
    file.stream() << report.dump(2) << '\n';
    file.commit();
  }
}

void register_ensemble(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "ensemble", "Combine prediction files: z-scored sentence scores, "
                  "averaged OK probabilities");
  struct Opts {
    std::vector<std::string> preds;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--pred", opts->preds, "prediction file (repeatable)")
      ->required()
      ->expected(-1);
  cmd->add_option("--out", opts->out, "output prediction file")->required();

  cmd->callback([opts, cmd] {
    RunLog log(opts->out, "ensemble");
    log.config(cmd->config_to_str(true, false), 0);
    StageTimer timer;
    std::vector<std::vector<PredictionRecord>> systems;
    for (const std::string& path : opts->preds) {
      require_input(path, "prediction file");
      systems.push_back(read_predictions(path));
    }
    const std::vector<PredictionRecord>& first = systems.front();
    for (const auto& system : systems) {
      if (system.size() != first.size()) {
        throw ValidationError("ensemble: systems differ in sample count");
      }
      for (std::size_t i = 0; i < system.size(); ++i) {
        if (system[i].id != first[i].id) {
          throw ValidationError(
              "ensemble: systems disagree on record order at '" +
              system[i].id + "'");
        }
      }
    }

    std::vector<std::vector<double>> scores;
    std::vector<std::vector<std::vector<double>>> probs;
    for (const auto& system : systems) {
      std::vector<double> s;
      std::vector<std::vector<double>> p;
      for (const PredictionRecord& record : system) {
        s.push_back(record.pred.score);
        p.push_back(record.pred.ok_probs);
      }
      scores.push_back(std::move(s));
      probs.push_back(std::move(p));
    }
    const std::vector<double> combined_scores = zscore_ensemble(scores);
    const std::vector<std::vector<double>> combined_probs =
        average_ok_probs(probs);

    std::vector<PredictionRecord> out;
    for (std::size_t i = 0; i < first.size(); ++i) {
      out.push_back({first[i].id, {combined_scores[i], combined_probs[i]}});
    }
    write_predictions(out, opts->out);
    log.stage("ensemble", out.size(), timer.elapsed_ms());
  });
}

void register_spans(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "spans", "Convert OK probabilities to severity-graded error spans");
  struct Opts {
    std::string pred;
    std::string data;
    std::string out;
    double e_minor = 0.5;
    double e_major = 0.5;
    double e_bad = 0.5;
    bool have_e_bad = false;
    std::string tags_out;
    std::string merge = "worst";
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--pred", opts->pred, "prediction file")->required();
  cmd->add_option("--data", opts->data,
                  "QE dataset carrying the translations (for offsets)")
      ->required();
  cmd->add_option("--out", opts->out, "output span submission file")
      ->required();
  cmd->add_option("--e-minor", opts->e_minor, "OK-probability bound for Minor")
      ->required();
  cmd->add_option("--e-major", opts->e_major, "OK-probability bound for Major")
      ->required();
  auto* e_bad =
      cmd->add_option("--e-bad", opts->e_bad,
                      "binary BAD threshold, used for --tags-out");
  auto* tags_out = cmd->add_option("--tags-out", opts->tags_out,
                                   "also write binary OK/BAD tags here");
  e_bad->needs(tags_out);
  tags_out->needs(e_bad);
  cmd->add_option("--merge", opts->merge, "span severity rule: worst or majority")
      ->capture_default_str();

  cmd->callback([opts, cmd] {
    require_input(opts->pred, "prediction file");
    require_input(opts->data, "QE dataset");
    RunLog log(opts->out, "spans");
    log.config(cmd->config_to_str(true, false), 0);
    StageTimer timer;
    const MergeRule rule = merge_rule_from_name(opts->merge);
    // aligned holds pointers into samples; keep it alive alongside
    const std::vector<QESample> samples = read_qe_jsonl(opts->data);
    const Aligned aligned = align(read_predictions(opts->pred), samples, true);

    std::vector<SpanRecord> records;
    for (std::size_t i = 0; i < aligned.preds.size(); ++i) {
      const auto fine = fine_tag(aligned.preds[i].pred.ok_probs,
                                 opts->e_minor, opts->e_major);
      records.push_back(
          {aligned.preds[i].id,
           assemble_spans(fine, aligned.samples[i]->translation, rule)});
    }
    write_span_file(records, opts->out);

    if (!opts->tags_out.empty()) {
      AtomicFile file(opts->tags_out);
      for (const PredictionRecord& pred : aligned.preds) {
        file.stream() << pred.id << '\t'
                      << tags_to_string(
                             tag_by_threshold(pred.pred.ok_probs, opts->e_bad))
                      << '\n';
      }
      file.commit();
    }
    log.stage("spans", records.size(), timer.elapsed_ms());
  });
}

void register_tune(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "tune", "Grid-search thresholds against an annotated dev set");
  struct Opts {
    std::string pred;
    std::string gold;
    std::string task;
    std::string out;
    double step = 0.01;
    std::string mode = "lenient";
    std::string merge = "worst";
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--pred", opts->pred, "prediction file on the dev set")
      ->required();
  cmd->add_option("--gold", opts->gold, "annotated dev set")->required();
  cmd->add_option("--task", opts->task,
                  "word (e_bad by MCC) or span (e_minor/e_major by F1)")
      ->required();
  cmd->add_option("--step", opts->step, "grid step over [0,1]")
      ->capture_default_str();
  cmd->add_option("--mode", opts->mode, "span F1 mode: strict or lenient")
      ->capture_default_str();
  cmd->add_option("--merge", opts->merge, "span severity rule")
      ->capture_default_str();
  cmd->add_option("--out", opts->out, "optional JSON output file");

  cmd->callback([opts, cmd] {
    require_input(opts->pred, "prediction file");
    require_input(opts->gold, "dev set");
    RunLog log(opts->out.empty() ? opts->pred : opts->out, "tune");
    log.config(cmd->config_to_str(true, false), 0);
    StageTimer timer;
    const std::vector<QESample> samples = read_qe_jsonl(opts->gold);
    const Aligned aligned = align(read_predictions(opts->pred), samples, true);
    if (aligned.preds.empty()) {
      throw ValidationError("tune: empty dev set");
    }
    const std::vector<double> grid = threshold_grid(opts->step);

    std::vector<std::vector<double>> probs;
    for (const PredictionRecord& pred : aligned.preds) {
      probs.push_back(pred.pred.ok_probs);
    }

    json report;
    if (opts->task == "word") {
      std::vector<WordTagSeq> gold;
      for (const QESample* sample : aligned.samples) {
        if (!sample->tags) {
          throw ValidationError("record '" + sample->id + "' has no tags");
        }
        gold.push_back(*sample->tags);
      }
      const BadThresholdSearch best = grid_search_e_bad(probs, gold, grid);
      report["task"] = "word";
      report["e_bad"] = best.e_bad;
      report["mcc"] = best.mcc;
    } else if (opts->task == "span") {
      std::vector<TokenizedText> translations;
      std::vector<std::vector<ErrorSpan>> gold;
      for (const QESample* sample : aligned.samples) {
        if (!sample->spans) {
          throw ValidationError("record '" + sample->id + "' has no spans");
        }
        translations.push_back(sample->translation);
        gold.push_back(*sample->spans);
      }
      const FineThresholdSearch best = grid_search_fine(
          probs, translations, gold, grid, span_match_from_name(opts->mode),
          merge_rule_from_name(opts->merge));
      report["task"] = "span";
      report["e_minor"] = best.e_minor;
      report["e_major"] = best.e_major;
      report["f1"] = best.f1;
      report["mode"] = opts->mode;
    } else {
      throw ValidationError("tune: unknown task '" + opts->task + "'");
    }
    emit_report(report, opts->out);
    log.stage("tune", aligned.preds.size(), timer.elapsed_ms());
  });
}

void register_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "Score predictions against gold");
  struct Opts {
    std::string task;
    std::string pred;
    std::string gold;
    std::string out;
    double e_bad = 0.5;
    std::string mode = "lenient";
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--task", opts->task, "sentence, word or span")->required();
  cmd->add_option("--pred", opts->pred,
                  "prediction file (sentence/word) or span file (span)")
      ->required();
  cmd->add_option("--gold", opts->gold, "annotated dataset")->required();
  cmd->add_option("--e-bad", opts->e_bad, "BAD threshold for the word task")
      ->capture_default_str();
  cmd->add_option("--mode", opts->mode, "span F1 mode: strict or lenient")
      ->capture_default_str();
  cmd->add_option("--out", opts->out, "optional JSON output file");

  cmd->callback([opts, cmd] {
    require_input(opts->pred, "prediction file");
    require_input(opts->gold, "gold dataset");
    const std::vector<QESample> samples = read_qe_jsonl(opts->gold);

    json report;
    if (opts->task == "sentence") {
      const Aligned aligned = align(read_predictions(opts->pred), samples, false);
      std::vector<double> pred_scores, gold_scores;
      for (std::size_t i = 0; i < aligned.preds.size(); ++i) {
        if (!aligned.samples[i]->mqm) {
          throw ValidationError("record '" + aligned.samples[i]->id +
                                "' has no score");
        }
        pred_scores.push_back(aligned.preds[i].pred.score);
        gold_scores.push_back(*aligned.samples[i]->mqm);
      }
      report["metric"] = "spearman";
      report["value"] = spearman(pred_scores, gold_scores);
      report["samples"] = pred_scores.size();
    } else if (opts->task == "word") {
      const Aligned aligned = align(read_predictions(opts->pred), samples, true);
      std::vector<WordTagSeq> pred_tags, gold_tags;
      for (std::size_t i = 0; i < aligned.preds.size(); ++i) {
        if (!aligned.samples[i]->tags) {
          throw ValidationError("record '" + aligned.samples[i]->id +
                                "' has no tags");
        }
        pred_tags.push_back(
            tag_by_threshold(aligned.preds[i].pred.ok_probs, opts->e_bad));
        gold_tags.push_back(*aligned.samples[i]->tags);
      }
      const ConfusionCounts counts = confusion(pred_tags, gold_tags);
      report["metric"] = "mcc";
      report["value"] = mcc(counts);
      report["e_bad"] = opts->e_bad;
      report["tp"] = counts.tp;
      report["tn"] = counts.tn;
      report["fp"] = counts.fp;
      report["fn"] = counts.fn;
    } else if (opts->task == "span") {
      const std::vector<SpanRecord> pred_records = read_span_file(opts->pred);
      std::map<std::string, const QESample*> by_id;
      for (const QESample& sample : samples) by_id[sample.id] = &sample;
      std::vector<std::vector<ErrorSpan>> pred, gold;
      std::uint64_t pred_chars = 0, gold_chars = 0;
      for (const SpanRecord& record : pred_records) {
        const auto it = by_id.find(record.id);
        if (it == by_id.end()) {
          throw ValidationError("prediction for unknown record id '" +
                                record.id + "'");
        }
        if (!it->second->spans) {
          throw ValidationError("record '" + record.id + "' has no spans");
        }
        pred.push_back(record.spans);
        gold.push_back(*it->second->spans);
        for (const ErrorSpan& span : record.spans) {
          pred_chars += span.end_char - span.start_char;
        }
        for (const ErrorSpan& span : *it->second->spans) {
          gold_chars += span.end_char - span.start_char;
        }
      }
      const SpanMatch mode = span_match_from_name(opts->mode);
      report["metric"] = "span_f1";
      report["mode"] = opts->mode;
      report["value"] = span_f1(pred, gold, mode);
      report["samples"] = pred.size();
      report["pred_chars"] = pred_chars;
      report["gold_chars"] = gold_chars;
    } else {
      throw ValidationError("eval: unknown task '" + opts->task + "'");
    }
    emit_report(report, opts->out);
  });
}

}  // namespace

void register_eval_commands(CLI::App& app) {
  register_ensemble(app);
  register_spans(app);
  register_tune(app);
  register_eval(app);
}

}  // namespace pseudoqe::cli
