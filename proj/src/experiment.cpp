#include "veritext/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "veritext/errors.hpp"
#include "veritext/rng.hpp"
#include "veritext/stopwords.hpp"

namespace veritext {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

int cell_rank(const std::string& method, const std::string& features) {
  static const std::vector<std::pair<std::string, std::string>> order =
      ExperimentConfig::default_cells();
  for (size_t i = 0; i < order.size(); ++i) {
    if (order[i].first == method && order[i].second == features)
      return static_cast<int>(i);
  }
  return static_cast<int>(order.size());
}

std::vector<TokenSequence> tokenize_corpus(const Corpus& corpus,
                                           Pipeline pipeline) {
  std::vector<TokenSequence> docs;
  docs.reserve(corpus.size());
  for (const LabeledPost& post : corpus.posts)
    docs.push_back(preprocess(post.text, pipeline));
  return docs;
}

void ensure_baseline_docs(FeatureContext& ctx, const ExperimentConfig& cfg,
                          const Corpus& train) {
  if (ctx.baseline_docs.empty() && !train.posts.empty())
    ctx.baseline_docs = tokenize_corpus(train, cfg.baseline_pipeline);
  if (ctx.labels.empty()) {
    for (const LabeledPost& post : train.posts) ctx.labels.push_back(post.label);
  }
}

void ensure_tfidf(FeatureContext& ctx, const ExperimentConfig& cfg,
                  const Corpus& train) {
  ensure_baseline_docs(ctx, cfg, train);
  if (!ctx.tfidf) ctx.tfidf = fit_tfidf(ctx.baseline_docs, cfg.tfidf_min_df);
  if (!ctx.x_tfidf) {
    std::vector<SparseVector> x;
    x.reserve(ctx.baseline_docs.size());
    for (const TokenSequence& doc : ctx.baseline_docs)
      x.push_back(transform_tfidf(*ctx.tfidf, doc));
    ctx.x_tfidf = std::move(x);
  }
}

void ensure_counts(FeatureContext& ctx, const ExperimentConfig& cfg,
                   const Corpus& train) {
  ensure_tfidf(ctx, cfg, train);
  if (!ctx.x_counts) {
    std::vector<SparseVector> x;
    x.reserve(ctx.baseline_docs.size());
    for (const TokenSequence& doc : ctx.baseline_docs)
      x.push_back(count_vector(ctx.tfidf->vocab, doc));
    ctx.x_counts = std::move(x);
  }
}

void ensure_word2vec(FeatureContext& ctx, const ExperimentConfig& cfg,
                     const Corpus& train) {
  ensure_baseline_docs(ctx, cfg, train);
  if (!ctx.embeddings) {
    Word2VecParams params = cfg.word2vec;
    params.seed = component_seed(cfg, "word2vec");
    ctx.embeddings = train_word2vec(ctx.baseline_docs, params);
  }
  if (!ctx.x_word2vec) {
    std::vector<SparseVector> x;
    x.reserve(ctx.baseline_docs.size());
    for (const TokenSequence& doc : ctx.baseline_docs)
      x.push_back(to_sparse(embed_mean(*ctx.embeddings, doc)));
    ctx.x_word2vec = std::move(x);
  }
}

void ensure_tokens(FeatureContext& ctx, const ExperimentConfig& cfg,
                   const Corpus& train) {
  if (ctx.encoder_docs.empty() && !train.posts.empty())
    ctx.encoder_docs = tokenize_corpus(train, cfg.encoder_pipeline);
  if (ctx.labels.empty()) {
    for (const LabeledPost& post : train.posts) ctx.labels.push_back(post.label);
  }
  if (!ctx.token_vocab)
    ctx.token_vocab =
        build_frequency_vocabulary(ctx.encoder_docs, cfg.encoder_train.min_count);
}

EncoderModel fit_encoder(const ExperimentConfig& cfg, FeatureContext& ctx,
                         TrainLog* log) {
  EncoderConfig ecfg = cfg.encoder;
  ecfg.vocab_size = static_cast<int64_t>(ctx.token_vocab->size()) + 2;
  ecfg.seed = component_seed(cfg, "encoder");
  EncoderModel model = encoder_init(ecfg);
  AdamState state;
  EncoderTrainParams train_params;
  train_params.lr = cfg.encoder_train.lr;

  const int64_t n = static_cast<int64_t>(ctx.encoder_docs.size());
  const int64_t batch_size = std::max<int64_t>(1, cfg.encoder_train.batch);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng shuffle_rng(mix_seed(ecfg.seed, 0x0bdeb));

  for (int epoch = 0; epoch < cfg.encoder_train.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int64_t batches = 0;
    for (int64_t start = 0; start < n; start += batch_size) {
      const int64_t end = std::min(n, start + batch_size);
      std::vector<TokenSequence> docs;
      std::vector<Label> labels;
      docs.reserve(end - start);
      for (int64_t i = start; i < end; ++i) {
        docs.push_back(ctx.encoder_docs[order[i]]);
        labels.push_back(ctx.labels[order[i]]);
      }
      Batch batch = make_batch(docs, *ctx.token_vocab, ecfg.max_len, &labels);
      epoch_loss += train_step(model, batch, state, train_params);
      ++batches;
    }
    if (log && batches > 0)
      log->objective.push_back(epoch_loss / static_cast<double>(batches));
  }
  return model;
}

}  // namespace

bool valid_pair(const std::string& method, const std::string& features) {
  if (method == "nb") return features == "tfidf";
  if (method == "encoder") return features == "tokens";
  if (method == "logreg" || method == "svm" || method == "forest" ||
      method == "boost")
    return features == "tfidf" || features == "word2vec";
  return false;
}

std::string pair_error_message(const std::string& method,
                               const std::string& features) {
  if (method == "nb" && features != "tfidf")
    return "naive bayes runs on tf-idf term counts only; " + features +
           " features are outside the supported grid";
  if (method == "encoder" && features != "tokens")
    return "the encoder consumes raw token sequences (features = tokens)";
  return "unsupported (method, features) pair: " + method + ":" + features;
}

ModelArtifact train_model(const ExperimentConfig& cfg, const std::string& method,
                          const std::string& features, const Corpus& train,
                          FeatureContext* context, TrainLog* log) {
  if (!valid_pair(method, features))
    throw InvalidPairError(pair_error_message(method, features));
  if (train.posts.empty()) throw DomainError("train_model: empty training corpus");

  FeatureContext local;
  FeatureContext& ctx = context ? *context : local;

  ModelArtifact artifact;
  artifact.kind = method;
  artifact.feature.features = features;
  artifact.feature.pipeline =
      method == "encoder" ? cfg.encoder_pipeline : cfg.baseline_pipeline;
  artifact.feature.stopword_hash = stopword_list_hash();
  artifact.config_snapshot = config_snapshot(cfg);
  artifact.seed = cfg.global_seed;

  if (features == "tfidf") {
    ensure_tfidf(ctx, cfg, train);
    artifact.feature.tfidf = *ctx.tfidf;
  } else if (features == "word2vec") {
    ensure_word2vec(ctx, cfg, train);
    artifact.feature.embeddings.vocab = ctx.embeddings->vocab;
    artifact.feature.embeddings.dim = ctx.embeddings->dim;
    artifact.feature.embeddings.input = ctx.embeddings->input;
  } else {
    ensure_tokens(ctx, cfg, train);
    artifact.feature.token_vocab = *ctx.token_vocab;
  }

  if (method == "nb") {
    ensure_counts(ctx, cfg, train);
    artifact.model = nb_fit(*ctx.x_counts, ctx.labels, cfg.nb_alpha);
  } else if (method == "logreg") {
    const auto& x = features == "tfidf" ? *ctx.x_tfidf : *ctx.x_word2vec;
    LogregParams params = cfg.logreg;
    params.seed = component_seed(cfg, "logreg");
    auto [model, fit_log] = logreg_fit(x, ctx.labels, params);
    artifact.model = std::move(model);
    if (log) *log = std::move(fit_log);
  } else if (method == "svm") {
    const auto& x = features == "tfidf" ? *ctx.x_tfidf : *ctx.x_word2vec;
    SvmParams params = cfg.svm;
    params.seed = component_seed(cfg, "svm");
    auto [model, fit_log] = svm_fit(x, ctx.labels, params);
    artifact.model = std::move(model);
    if (log) *log = std::move(fit_log);
  } else if (method == "forest") {
    const auto& x = features == "tfidf" ? *ctx.x_tfidf : *ctx.x_word2vec;
    ForestParams params = cfg.forest;
    params.seed = component_seed(cfg, "forest");
    if (features == "tfidf") params.max_depth = cfg.forest_max_depth_tfidf;
    artifact.model = forest_fit(x, ctx.labels, params);
  } else if (method == "boost") {
    const auto& x = features == "tfidf" ? *ctx.x_tfidf : *ctx.x_word2vec;
    BoostParams params = cfg.boost;
    params.seed = component_seed(cfg, "boost");
    auto [model, fit_log] = boost_fit(x, ctx.labels, params);
    artifact.model = std::move(model);
    if (log) *log = std::move(fit_log);
  } else {  // encoder
    artifact.model = fit_encoder(cfg, ctx, log);
  }
  return artifact;
}

ResultsTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.train_path.empty() || cfg.validation_path.empty())
    throw ConfigError("experiment: data.train and data.validation are required");
  for (const auto& [method, features] : cfg.cells) {
    if (!valid_pair(method, features))
      throw ConfigError("experiment: " + pair_error_message(method, features));
  }

  const Corpus official_train =
      load_dataset(cfg.train_path, format_from_path(cfg.train_path), "train");
  const Corpus official_val = load_dataset(
      cfg.validation_path, format_from_path(cfg.validation_path), "validation");

  SplitSpec spec;
  spec.ratio = cfg.split_ratio;
  spec.seed = cfg.split_seed_set ? cfg.split_seed : cfg.global_seed;
  auto [train, validation] = combine_and_split(official_train, official_val, spec);

  Corpus eval_corpus;
  if (cfg.eval_split == "test") {
    if (cfg.test_path.empty())
      throw ConfigError("experiment: eval_split = test requires data.test");
    eval_corpus = load_dataset(cfg.test_path, format_from_path(cfg.test_path), "test");
  } else {
    eval_corpus = std::move(validation);
  }

  std::vector<std::pair<std::string, std::string>> cells = cfg.cells;
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
    return cell_rank(a.first, a.second) < cell_rank(b.first, b.second);
  });
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

  std::vector<std::string> eval_texts;
  std::vector<Label> gold;
  eval_texts.reserve(eval_corpus.size());
  for (const LabeledPost& post : eval_corpus.posts) {
    eval_texts.push_back(post.text);
    gold.push_back(post.label);
  }

  ResultsTable table;
  table.split_tag = cfg.eval_split;
  table.seed = cfg.global_seed;
  table.snapshot = config_snapshot(cfg);

  FeatureContext ctx;
  for (const auto& [method, features] : cells) {
    const double t0 = now_seconds();
    ModelArtifact artifact = train_model(cfg, method, features, train, &ctx);
    std::vector<Label> pred = artifact_predict(artifact, eval_texts);
    CellResult row;
    row.method = method;
    row.features = features;
    row.report = metrics(confusion(pred, gold));
    row.seconds = now_seconds() - t0;
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_results_csv(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write results file: " + path);
  std::istringstream snapshot(table.snapshot);
  std::string line;
  while (std::getline(snapshot, line)) out << "# " << line << "\n";
  out << "method,features,accuracy,f1_weighted,f1_positive,seconds\n";
  char buf[160];
  for (const CellResult& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f,%.6f,%.6f,%.3f\n",
                  row.method.c_str(), row.features.c_str(), row.report.accuracy,
                  row.report.f1_weighted, row.report.f1_positive, row.seconds);
    out << buf;
  }
}

std::string format_results_text(const ResultsTable& table) {
  std::ostringstream out;
  out << "results on the " << table.split_tag
      << " split (positive class: fake, seed " << table.seed << ")\n\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-10s %-10s %10s %12s %12s %10s\n", "method",
                "features", "accuracy", "f1_weighted", "f1_positive", "seconds");
  out << buf;
  std::string last_features;
  for (const CellResult& row : table.rows) {
    if (!last_features.empty() && row.features != last_features) out << "\n";
    last_features = row.features;
    std::snprintf(buf, sizeof(buf), "%-10s %-10s %10.4f %12.4f %12.4f %10.3f\n",
                  row.method.c_str(), row.features.c_str(), row.report.accuracy,
                  row.report.f1_weighted, row.report.f1_positive, row.seconds);
    out << buf;
  }
  return out.str();
}

void write_results_text(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write results file: " + path);
  out << format_results_text(table);
  out << "\n";
  std::istringstream snapshot(table.snapshot);
  std::string line;
  while (std::getline(snapshot, line)) out << "# " << line << "\n";
}

}  // namespace veritext
