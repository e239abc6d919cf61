#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "veritext/corpus.hpp"
#include "veritext/encoder.hpp"
#include "veritext/linear.hpp"
#include "veritext/trees.hpp"
#include "veritext/word2vec.hpp"

namespace veritext {

struct EncoderTrainConfig {
  int epochs = 2;
  int batch = 32;
  double lr = 1e-3;
  int64_t min_count = 2;
};

/// Full experiment configuration. Every key is optional in the file; the
/// defaults below are the shipped ones. Component seeds are derived from
/// seed.global, so a one-cell run reproduces the matching row of a full grid.
struct ExperimentConfig {
  // [data]
  std::string train_path;
  std::string validation_path;
  std::string test_path;

  // [split]
  double split_ratio = 0.9;
  bool split_seed_set = false;
  uint64_t split_seed = 42;  // defaults to seed.global when unset

  // [preprocess]
  Pipeline baseline_pipeline = Pipeline::Classic;
  Pipeline encoder_pipeline = Pipeline::Raw;

  // [tfidf]
  int64_t tfidf_min_df = 1;

  // [word2vec]
  Word2VecParams word2vec;

  // [nb]
  double nb_alpha = 1.0;

  // [logreg]
  LogregParams logreg;

  // [svm]
  SvmParams svm;

  // [forest]
  ForestParams forest;
  int forest_max_depth_tfidf = 40;  // depth cap for wide tf-idf spaces

  // [boost]
  BoostParams boost;

  // [encoder]
  EncoderConfig encoder;
  EncoderTrainConfig encoder_train;

  // [experiment]
  std::vector<std::pair<std::string, std::string>> cells;  // (method, features)
  std::string eval_split = "validation";  // validation (resplit) or test
  std::string output_csv = "results.csv";
  std::string output_table = "results.txt";

  // [seed]
  uint64_t global_seed = 42;

  /// The paper-grid default: 9 baseline cells plus the encoder row.
  static std::vector<std::pair<std::string, std::string>> default_cells();

  ExperimentConfig();
};

/// Parse a config file. Unknown sections or keys raise ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin);

/// Canonical INI serialization of the resolved config; reparsing it yields an
/// equivalent config. Embedded in artifacts and result files.
std::string config_snapshot(const ExperimentConfig& config);

/// Seed for a named component stream, derived from the global seed.
uint64_t component_seed(const ExperimentConfig& config, const std::string& name);

}  // namespace veritext
