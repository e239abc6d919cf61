#pragma once

#include <optional>
#include <string>
#include <vector>

#include "veritext/artifact.hpp"
#include "veritext/config.hpp"
#include "veritext/corpus.hpp"
#include "veritext/metrics.hpp"

namespace veritext {

/// The supported (method, features) grid: nb pairs with tfidf counts only,
/// the encoder with tokens only, everything else with tfidf or word2vec.
bool valid_pair(const std::string& method, const std::string& features);
std::string pair_error_message(const std::string& method,
                               const std::string& features);

/// Lazily built, shareable feature stages over one training corpus. Sharing
/// the context across experiment cells changes nothing observable: every
/// stage is seeded from the config alone.
struct FeatureContext {
  std::vector<TokenSequence> baseline_docs;
  std::vector<TokenSequence> encoder_docs;
  std::vector<Label> labels;
  std::optional<TfidfModel> tfidf;
  std::optional<std::vector<SparseVector>> x_tfidf;
  std::optional<std::vector<SparseVector>> x_counts;
  std::optional<EmbeddingTable> embeddings;
  std::optional<std::vector<SparseVector>> x_word2vec;
  std::optional<Vocabulary> token_vocab;
};

/// Fit one (method, features) cell on `train` and package the result as a
/// self-contained artifact. Throws InvalidPairError for pairs outside the
/// grid. `log` (when non-null) receives the per-epoch objective when the
/// model family records one.
ModelArtifact train_model(const ExperimentConfig& config,
                          const std::string& method,
                          const std::string& features, const Corpus& train,
                          FeatureContext* context = nullptr,
                          TrainLog* log = nullptr);

struct CellResult {
  std::string method;
  std::string features;
  MetricsReport report;
  double seconds = 0.0;  // wall-clock fit+predict time for the cell
};

struct ResultsTable {
  std::vector<CellResult> rows;
  std::string split_tag;
  uint64_t seed = 0;
  std::string snapshot;
};

/// Resplit the official train+validation corpora, fit every requested cell on
/// the training side and evaluate on the chosen split. Rows come out in the
/// fixed grid order regardless of the order requested. Invalid pairs and
/// missing paths raise ConfigError.
ResultsTable run_experiment(const ExperimentConfig& config);

/// CSV export: '#'-prefixed config snapshot, then the pinned header
/// method,features,accuracy,f1_weighted,f1_positive,seconds.
void write_results_csv(const ResultsTable& table, const std::string& path);

/// Aligned plain-text table with the same content.
void write_results_text(const ResultsTable& table, const std::string& path);
std::string format_results_text(const ResultsTable& table);

}  // namespace veritext
