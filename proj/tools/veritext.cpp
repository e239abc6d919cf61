// veritext — fake-news text classification toolkit.
//
// Exit codes: 0 success, 2 I/O or parse or config error, 3 unsupported
// (model, features) pair, 4 training divergence, 5 model file version
// mismatch, 6 gradient check failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "veritext/artifact.hpp"
#include "veritext/config.hpp"
#include "veritext/corpus.hpp"
#include "veritext/errors.hpp"
#include "veritext/experiment.hpp"
#include "veritext/gradcheck.hpp"
#include "veritext/metrics.hpp"
#include "veritext/stopwords.hpp"

namespace vt = veritext;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// VERITEXT_SEED overrides the config seed; printed whenever it is used.
void apply_seed_override(vt::ExperimentConfig& cfg) {
  const char* env = std::getenv("VERITEXT_SEED");
  if (!env || !*env) return;
  try {
    size_t pos = 0;
    const uint64_t seed = std::stoull(env, &pos);
    if (pos != std::string(env).size()) throw std::invalid_argument(env);
    cfg.global_seed = seed;
    std::cout << "seed override from VERITEXT_SEED: " << seed << "\n";
  } catch (const std::exception&) {
    throw vt::ConfigError(std::string("VERITEXT_SEED is not a valid seed: '") +
                          env + "'");
  }
}

vt::FileFormat resolve_format(const std::string& path, const std::string& flag) {
  if (flag == "csv") return vt::FileFormat::Csv;
  if (flag == "tsv") return vt::FileFormat::Tsv;
  return vt::format_from_path(path);
}

int cmd_stats(const std::string& data, const std::string& pipeline,
              const std::string& format) {
  const vt::Corpus corpus =
      vt::load_dataset(data, resolve_format(data, format), "dataset");
  const vt::Pipeline pl = vt::parse_pipeline(pipeline);
  const vt::CorpusStats stats = vt::corpus_stats(corpus, pl);
  std::printf("file: %s\n", data.c_str());
  std::printf("samples: %zu\n", stats.sample_count);
  std::printf("fake: %zu\n", stats.fake_count);
  std::printf("real: %zu\n", stats.real_count);
  std::printf("pipeline: %s\n", vt::to_string(pl));
  std::printf("avg_words: %.3f\n", stats.avg_words);
  std::printf("max_words: %zu\n", stats.max_words);
  std::printf("min_words: %zu\n", stats.min_words);
  return 0;
}

int cmd_train(const std::string& model, const std::string& features,
              const std::string& data, const std::string& config_path,
              const std::string& out) {
  vt::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = vt::load_config(config_path);
  apply_seed_override(cfg);

  const vt::Corpus train =
      vt::load_dataset(data, vt::format_from_path(data), "train");
  const double t0 = now_seconds();
  vt::TrainLog log;
  const vt::ModelArtifact artifact =
      vt::train_model(cfg, model, features, train, nullptr, &log);
  vt::save_artifact(artifact, out);
  const double elapsed = now_seconds() - t0;

  double objective = log.final_objective();
  if (log.objective.empty()) {
    // families without an iterative objective report training log-loss
    std::vector<std::string> texts;
    for (const vt::LabeledPost& p : train.posts) texts.push_back(p.text);
    const std::vector<double> scores = vt::artifact_scores(artifact, texts);
    double loss = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
      const double p_fake = std::min(1.0 - 1e-12, std::max(1e-12, scores[i]));
      loss -= std::log(train.posts[i].label == vt::Label::Fake ? p_fake
                                                               : 1.0 - p_fake);
    }
    objective = loss / static_cast<double>(scores.size());
  }
  std::printf("model: %s (%s)\n", model.c_str(), features.c_str());
  std::printf("seed: %llu\n", static_cast<unsigned long long>(cfg.global_seed));
  std::printf("final objective: %.6f\n", objective);
  std::printf("elapsed: %.3fs\n", elapsed);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

void print_report(const vt::MetricsReport& report) {
  std::printf("positive class: fake\n");
  std::printf("accuracy:    %.6f\n", report.accuracy);
  std::printf("f1_weighted: %.6f\n", report.f1_weighted);
  std::printf("f1_positive: %.6f\n", report.f1_positive);
  std::printf("precision:   %.6f\n", report.precision);
  std::printf("recall:      %.6f\n", report.recall);
  std::printf("confusion: tp=%lld fp=%lld fn=%lld tn=%lld\n",
              static_cast<long long>(report.cm.tp),
              static_cast<long long>(report.cm.fp),
              static_cast<long long>(report.cm.fn),
              static_cast<long long>(report.cm.tn));
}

int cmd_evaluate(const std::string& model_file, const std::string& data,
                 const std::string& csv) {
  const vt::ModelArtifact artifact = vt::load_artifact(model_file);
  const vt::Corpus corpus =
      vt::load_dataset(data, vt::format_from_path(data), "eval");
  std::vector<std::string> texts;
  std::vector<vt::Label> gold;
  for (const vt::LabeledPost& p : corpus.posts) {
    texts.push_back(p.text);
    gold.push_back(p.label);
  }
  const std::vector<vt::Label> pred = vt::artifact_predict(artifact, texts);
  const vt::MetricsReport report = vt::metrics(vt::confusion(pred, gold));

  std::printf("model: %s (%s), seed %llu\n", artifact.kind.c_str(),
              artifact.feature.features.c_str(),
              static_cast<unsigned long long>(artifact.seed));
  std::printf("data: %s (%zu posts)\n", data.c_str(), corpus.size());
  print_report(report);

  if (!csv.empty()) {
    std::ofstream out(csv, std::ios::binary);
    if (!out) throw vt::IoError("cannot write metrics file: " + csv);
    std::istringstream snapshot(artifact.config_snapshot);
    std::string line;
    while (std::getline(snapshot, line)) out << "# " << line << "\n";
    out << "accuracy,f1_weighted,f1_positive,precision,recall,tp,fp,fn,tn\n";
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%.6f,%.6f,%.6f,%.6f,%lld,%lld,%lld,%lld\n",
                  report.accuracy, report.f1_weighted, report.f1_positive,
                  report.precision, report.recall,
                  static_cast<long long>(report.cm.tp),
                  static_cast<long long>(report.cm.fp),
                  static_cast<long long>(report.cm.fn),
                  static_cast<long long>(report.cm.tn));
    out << buf;
  }
  return 0;
}

int cmd_predict(const std::string& model_file, const std::string& input,
                const std::string& output) {
  const vt::ModelArtifact artifact = vt::load_artifact(model_file);
  const std::vector<vt::RawRow> rows =
      vt::load_posts(input, vt::format_from_path(input));
  std::vector<std::string> texts;
  for (const vt::RawRow& row : rows) texts.push_back(row.text);
  const std::vector<vt::Label> pred = vt::artifact_predict(artifact, texts);

  std::ofstream out(output, std::ios::binary);
  if (!out) throw vt::IoError("cannot write predictions file: " + output);
  out << "id\tlabel\n";
  for (size_t i = 0; i < rows.size(); ++i)
    out << rows[i].id << "\t" << vt::to_string(pred[i]) << "\n";
  std::printf("wrote %zu predictions to %s\n", rows.size(), output.c_str());
  return 0;
}

int cmd_experiment(const std::string& config_path) {
  vt::ExperimentConfig cfg = vt::load_config(config_path);
  apply_seed_override(cfg);
  const vt::ResultsTable table = vt::run_experiment(cfg);
  vt::write_results_csv(table, cfg.output_csv);
  vt::write_results_text(table, cfg.output_table);
  std::cout << vt::format_results_text(table);
  std::printf("wrote %s and %s\n", cfg.output_csv.c_str(),
              cfg.output_table.c_str());
  return 0;
}

int cmd_gradcheck(bool corrupt) {
  const std::vector<vt::GradcheckResult> results = vt::run_gradcheck(corrupt);
  std::string first_failure;
  for (const vt::GradcheckResult& r : results) {
    std::printf("%-28s max_rel_error %.3e (threshold %.0e) %s\n",
                r.block.c_str(), r.max_rel_error, r.threshold,
                r.pass ? "ok" : "FAIL");
    if (!r.pass && first_failure.empty()) first_failure = r.block;
  }
  if (!first_failure.empty()) {
    std::fprintf(stderr, "gradient check failed in block %s\n",
                 first_failure.c_str());
    return 6;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"veritext: fake-news text classification toolkit"};
  app.require_subcommand(1);

  auto* stats = app.add_subcommand("stats", "dataset statistics");
  std::string stats_data, stats_pipeline = "raw", stats_format = "auto";
  stats->add_option("--data", stats_data, "dataset file (csv/tsv)")->required();
  stats->add_option("--pipeline", stats_pipeline, "raw|classic");
  stats->add_option("--format", stats_format, "auto|csv|tsv");

  auto* train = app.add_subcommand("train", "fit a model and write an artifact");
  std::string train_model, train_features, train_data, train_config, train_out;
  train->add_option("--model", train_model, "nb|logreg|forest|boost|svm|encoder")
      ->required();
  train->add_option("--features", train_features, "tfidf|word2vec|tokens")
      ->required();
  train->add_option("--data", train_data, "labeled training file")->required();
  train->add_option("--config", train_config, "config file (defaults used otherwise)");
  train->add_option("--out", train_out, "output model file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "score a model on labeled data");
  std::string eval_model, eval_data, eval_csv;
  evaluate->add_option("--model-file", eval_model, "model artifact")->required();
  evaluate->add_option("--data", eval_data, "labeled file")->required();
  evaluate->add_option("--csv", eval_csv, "optional metrics CSV output");

  auto* predict = app.add_subcommand("predict", "label new posts");
  std::string pred_model, pred_input, pred_output;
  predict->add_option("--model-file", pred_model, "model artifact")->required();
  predict->add_option("--input", pred_input, "input file with id + tweet columns")
      ->required();
  predict->add_option("--output", pred_output, "output TSV of (id, label)")
      ->required();

  auto* experiment = app.add_subcommand("experiment", "run a results-table grid");
  std::string experiment_config;
  experiment->add_option("--config", experiment_config, "config file")->required();

  auto* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference gradient oracles");
  bool gradcheck_corrupt = false;
  gradcheck->add_flag("--corrupt", gradcheck_corrupt,
                      "perturb one gradient entry (negative control)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats->parsed()) return cmd_stats(stats_data, stats_pipeline, stats_format);
    if (train->parsed())
      return cmd_train(train_model, train_features, train_data, train_config,
                       train_out);
    if (evaluate->parsed()) return cmd_evaluate(eval_model, eval_data, eval_csv);
    if (predict->parsed()) return cmd_predict(pred_model, pred_input, pred_output);
    if (experiment->parsed()) return cmd_experiment(experiment_config);
    if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_corrupt);
  } catch (const vt::ArtifactError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  } catch (const vt::TrainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const vt::InvalidPairError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const vt::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const vt::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const vt::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const vt::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
