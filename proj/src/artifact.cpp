#include "veritext/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "veritext/errors.hpp"

namespace veritext {

namespace {

constexpr const char* kMagic = "VERITEXT-MODEL v1";

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, int64_t v) { put_u64(out, static_cast<uint64_t>(v)); }

void put_f64(std::string& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  put_u64(out, bits);
}

void put_f64_array(std::string& out, const std::vector<double>& v) {
  put_u64(out, v.size());
  for (double x : v) put_f64(out, x);
}

class BinaryReader {
 public:
  BinaryReader(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  uint64_t u64() {
    if (pos_ + 8 > data_.size())
      throw ArtifactError(path_ + ": truncated binary section");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  int64_t i64() { return static_cast<int64_t>(u64()); }
  double f64() {
    uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, sizeof(d));
    return d;
  }
  std::vector<double> f64_array() {
    uint64_t n = u64();
    std::vector<double> v(n);
    for (uint64_t i = 0; i < n; ++i) v[i] = f64();
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  std::string path_;
  size_t pos_ = 0;
};

void put_tree(std::string& out, const Tree& tree) {
  put_u64(out, tree.size());
  for (const TreeNode& node : tree) {
    put_i64(out, node.feature);
    put_f64(out, node.threshold);
    put_i64(out, node.left);
    put_i64(out, node.right);
    put_f64(out, node.value);
  }
}

Tree read_tree(BinaryReader& in) {
  const uint64_t n = in.u64();
  Tree tree(n);
  for (uint64_t i = 0; i < n; ++i) {
    tree[i].feature = static_cast<int32_t>(in.i64());
    tree[i].threshold = in.f64();
    tree[i].left = static_cast<int32_t>(in.i64());
    tree[i].right = static_cast<int32_t>(in.i64());
    tree[i].value = in.f64();
  }
  return tree;
}

std::string encode_feature_binary(const FeaturePipeline& fp) {
  std::string out;
  if (fp.features == "tfidf") {
    put_f64_array(out, fp.tfidf.idf);
  } else if (fp.features == "word2vec") {
    put_u64(out, static_cast<uint64_t>(fp.embeddings.dim));
    put_f64_array(out, fp.embeddings.input);
  }
  return out;
}

std::string encode_model_binary(const ModelArtifact& a) {
  std::string out;
  if (a.kind == "nb") {
    const auto& m = std::get<NaiveBayesModel>(a.model);
    put_f64(out, m.alpha);
    put_f64(out, m.log_prior[0]);
    put_f64(out, m.log_prior[1]);
    put_u64(out, static_cast<uint64_t>(m.vocab_size));
    put_f64_array(out, m.log_likelihood);
  } else if (a.kind == "logreg" || a.kind == "svm") {
    const auto& m = std::get<LinearModel>(a.model);
    put_u64(out, static_cast<uint64_t>(m.kind));
    put_f64(out, m.lambda);
    put_f64(out, m.bias);
    put_f64_array(out, m.weights);
  } else if (a.kind == "forest") {
    const auto& m = std::get<ForestModel>(a.model);
    put_u64(out, static_cast<uint64_t>(m.dim));
    put_u64(out, static_cast<uint64_t>(m.feature_subset));
    put_u64(out, m.trees.size());
    for (size_t t = 0; t < m.trees.size(); ++t) {
      put_u64(out, m.tree_seeds[t]);
      put_tree(out, m.trees[t]);
    }
  } else if (a.kind == "boost") {
    const auto& m = std::get<BoostedModel>(a.model);
    put_u64(out, static_cast<uint64_t>(m.dim));
    put_f64(out, m.base_score);
    put_f64(out, m.eta);
    put_f64(out, m.lambda_reg);
    put_u64(out, m.trees.size());
    for (const Tree& tree : m.trees) put_tree(out, tree);
  } else if (a.kind == "encoder") {
    auto m = std::get<EncoderModel>(a.model);  // copy: param_blocks wants non-const
    put_u64(out, static_cast<uint64_t>(m.config.vocab_size));
    put_u64(out, static_cast<uint64_t>(m.config.d_model));
    put_u64(out, static_cast<uint64_t>(m.config.heads));
    put_u64(out, static_cast<uint64_t>(m.config.layers));
    put_u64(out, static_cast<uint64_t>(m.config.d_ff));
    put_u64(out, static_cast<uint64_t>(m.config.max_len));
    put_u64(out, m.config.seed);
    for (const ParamBlock& block : param_blocks(m)) put_f64_array(out, *block.data);
  } else {
    throw ArtifactError("unknown model kind: " + a.kind);
  }
  return out;
}

const Vocabulary& artifact_vocab(const ModelArtifact& a) {
  if (a.feature.features == "tfidf") return a.feature.tfidf.vocab;
  if (a.feature.features == "word2vec") return a.feature.embeddings.vocab;
  return a.feature.token_vocab;
}

}  // namespace

void save_artifact(const ModelArtifact& artifact, const std::string& path) {
  std::ostringstream out;
  out << kMagic << "\n";
  out << "kind " << artifact.kind << "\n";
  out << "features " << artifact.feature.features << "\n";
  out << "pipeline " << to_string(artifact.feature.pipeline) << "\n";
  {
    static const char* digits = "0123456789abcdef";
    uint64_t h = artifact.feature.stopword_hash;
    std::string hex(16, '0');
    for (int i = 15; i >= 0; --i) {
      hex[i] = digits[h & 0xf];
      h >>= 4;
    }
    out << "stopwords " << hex << "\n";
  }
  out << "seed " << artifact.seed << "\n";

  size_t config_lines = 0;
  for (char c : artifact.config_snapshot) config_lines += c == '\n';
  out << "config " << config_lines << "\n" << artifact.config_snapshot;

  const Vocabulary& vocab = artifact_vocab(artifact);
  out << "vocab " << vocab.size() << " " << vocab.total_docs << "\n";
  for (size_t t = 0; t < vocab.size(); ++t) {
    out << vocab.tokens[t] << "\t" << vocab.doc_freq[t] << "\t"
        << vocab.count[t] << "\n";
  }

  std::string binary = encode_feature_binary(artifact.feature);
  binary += encode_model_binary(artifact);
  out << "binary " << binary.size() << "\n";
  out << binary;

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write model file: " + path);
  const std::string text = out.str();
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw IoError("failed writing model file: " + path);
}

namespace {

// Sequential line access over the in-memory file, keeping byte offsets so the
// binary section can be sliced exactly.
class LineScanner {
 public:
  LineScanner(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  std::string next_line() {
    if (pos_ >= data_.size()) throw ArtifactError(path_ + ": truncated header");
    size_t nl = data_.find('\n', pos_);
    if (nl == std::string::npos) nl = data_.size();
    std::string line = data_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return line;
  }

  std::string take_bytes(size_t n) {
    if (pos_ + n > data_.size())
      throw ArtifactError(path_ + ": truncated binary section");
    std::string out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  size_t offset() const { return pos_; }

 private:
  const std::string& data_;
  std::string path_;
  size_t pos_ = 0;
};

std::pair<std::string, std::string> split_kv(const std::string& line,
                                             const std::string& path) {
  const size_t sp = line.find(' ');
  if (sp == std::string::npos)
    throw ArtifactError(path + ": malformed header line: '" + line + "'");
  return {line.substr(0, sp), line.substr(sp + 1)};
}

uint64_t parse_hex64(const std::string& hex, const std::string& path) {
  if (hex.size() != 16) throw ArtifactError(path + ": malformed hash field");
  uint64_t v = 0;
  for (char c : hex) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<uint64_t>(c - 'a' + 10);
    else throw ArtifactError(path + ": malformed hash field");
  }
  return v;
}

}  // namespace

ModelArtifact load_artifact(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ArtifactError("cannot open model file: " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  const std::string data = buf.str();
  LineScanner in(data, path);

  if (in.next_line() != kMagic)
    throw ArtifactError(path + ": unsupported model file version (expected '" +
                        std::string(kMagic) + "')");

  ModelArtifact artifact;
  auto [k1, kind] = split_kv(in.next_line(), path);
  if (k1 != "kind") throw ArtifactError(path + ": missing kind field");
  artifact.kind = kind;
  auto [k2, features] = split_kv(in.next_line(), path);
  if (k2 != "features") throw ArtifactError(path + ": missing features field");
  artifact.feature.features = features;
  auto [k3, pipeline] = split_kv(in.next_line(), path);
  if (k3 != "pipeline") throw ArtifactError(path + ": missing pipeline field");
  artifact.feature.pipeline = parse_pipeline(pipeline);
  auto [k4, hash] = split_kv(in.next_line(), path);
  if (k4 != "stopwords") throw ArtifactError(path + ": missing stopwords field");
  artifact.feature.stopword_hash = parse_hex64(hash, path);
  auto [k5, seed] = split_kv(in.next_line(), path);
  if (k5 != "seed") throw ArtifactError(path + ": missing seed field");
  artifact.seed = std::stoull(seed);

  auto [k6, config_lines] = split_kv(in.next_line(), path);
  if (k6 != "config") throw ArtifactError(path + ": missing config section");
  const size_t n_config = std::stoull(config_lines);
  std::string snapshot;
  for (size_t i = 0; i < n_config; ++i) snapshot += in.next_line() + "\n";
  artifact.config_snapshot = snapshot;

  auto [k7, vocab_counts] = split_kv(in.next_line(), path);
  if (k7 != "vocab") throw ArtifactError(path + ": missing vocab section");
  std::istringstream vc(vocab_counts);
  size_t vocab_size = 0;
  int64_t total_docs = 0;
  vc >> vocab_size >> total_docs;
  Vocabulary vocab;
  vocab.total_docs = total_docs;
  vocab.tokens.reserve(vocab_size);
  for (size_t t = 0; t < vocab_size; ++t) {
    const std::string line = in.next_line();
    const size_t tab1 = line.find('\t');
    const size_t tab2 = line.find('\t', tab1 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos)
      throw ArtifactError(path + ": malformed vocab line");
    vocab.tokens.push_back(line.substr(0, tab1));
    vocab.doc_freq.push_back(std::stoll(line.substr(tab1 + 1, tab2 - tab1 - 1)));
    vocab.count.push_back(std::stoll(line.substr(tab2 + 1)));
  }
  vocab.rebuild_index();

  auto [k8, binary_size] = split_kv(in.next_line(), path);
  if (k8 != "binary") throw ArtifactError(path + ": missing binary section");
  const std::string binary = in.take_bytes(std::stoull(binary_size));
  BinaryReader reader(binary, path);

  // feature section
  if (artifact.feature.features == "tfidf") {
    artifact.feature.tfidf.vocab = std::move(vocab);
    artifact.feature.tfidf.idf = reader.f64_array();
  } else if (artifact.feature.features == "word2vec") {
    artifact.feature.embeddings.vocab = std::move(vocab);
    artifact.feature.embeddings.dim = static_cast<int64_t>(reader.u64());
    artifact.feature.embeddings.input = reader.f64_array();
  } else if (artifact.feature.features == "tokens") {
    artifact.feature.token_vocab = std::move(vocab);
  } else {
    throw ArtifactError(path + ": unknown features tag '" +
                        artifact.feature.features + "'");
  }

  // model section
  if (artifact.kind == "nb") {
    NaiveBayesModel m;
    m.alpha = reader.f64();
    m.log_prior[0] = reader.f64();
    m.log_prior[1] = reader.f64();
    m.vocab_size = static_cast<int64_t>(reader.u64());
    m.log_likelihood = reader.f64_array();
    artifact.model = std::move(m);
  } else if (artifact.kind == "logreg" || artifact.kind == "svm") {
    LinearModel m;
    m.kind = static_cast<LinearKind>(reader.u64());
    m.lambda = reader.f64();
    m.bias = reader.f64();
    m.weights = reader.f64_array();
    artifact.model = std::move(m);
  } else if (artifact.kind == "forest") {
    ForestModel m;
    m.dim = static_cast<int64_t>(reader.u64());
    m.feature_subset = static_cast<int64_t>(reader.u64());
    const uint64_t n_trees = reader.u64();
    for (uint64_t t = 0; t < n_trees; ++t) {
      m.tree_seeds.push_back(reader.u64());
      m.trees.push_back(read_tree(reader));
    }
    artifact.model = std::move(m);
  } else if (artifact.kind == "boost") {
    BoostedModel m;
    m.dim = static_cast<int64_t>(reader.u64());
    m.base_score = reader.f64();
    m.eta = reader.f64();
    m.lambda_reg = reader.f64();
    const uint64_t n_trees = reader.u64();
    for (uint64_t t = 0; t < n_trees; ++t) m.trees.push_back(read_tree(reader));
    artifact.model = std::move(m);
  } else if (artifact.kind == "encoder") {
    EncoderConfig cfg;
    cfg.vocab_size = static_cast<int64_t>(reader.u64());
    cfg.d_model = static_cast<int>(reader.u64());
    cfg.heads = static_cast<int>(reader.u64());
    cfg.layers = static_cast<int>(reader.u64());
    cfg.d_ff = static_cast<int>(reader.u64());
    cfg.max_len = static_cast<int>(reader.u64());
    cfg.seed = reader.u64();
    EncoderModel m = encoder_init(cfg);
    for (const ParamBlock& block : param_blocks(m)) {
      std::vector<double> values = reader.f64_array();
      if (values.size() != block.data->size())
        throw ArtifactError(path + ": parameter block size mismatch in " +
                            block.name);
      *block.data = std::move(values);
    }
    artifact.model = std::move(m);
  } else {
    throw ArtifactError(path + ": unknown model kind '" + artifact.kind + "'");
  }
  if (!reader.done())
    throw ArtifactError(path + ": trailing bytes in binary section");
  return artifact;
}

namespace {

struct Scored {
  Label label;
  double score;
};

std::vector<Scored> evaluate_texts(const ModelArtifact& artifact,
                                   const std::vector<std::string>& texts) {
  std::vector<TokenSequence> docs;
  docs.reserve(texts.size());
  for (const std::string& text : texts)
    docs.push_back(preprocess(text, artifact.feature.pipeline));

  std::vector<Scored> out;
  out.reserve(texts.size());

  auto featurize = [&](const TokenSequence& doc) -> SparseVector {
    if (artifact.feature.features == "tfidf")
      return transform_tfidf(artifact.feature.tfidf, doc);
    return to_sparse(embed_mean(artifact.feature.embeddings, doc));
  };

  if (artifact.kind == "nb") {
    const auto& model = std::get<NaiveBayesModel>(artifact.model);
    for (const TokenSequence& doc : docs) {
      const SparseVector x = count_vector(artifact.feature.tfidf.vocab, doc);
      const NbPrediction pred = nb_predict(model, x);
      out.push_back({pred.label, pred.posterior[0]});
    }
  } else if (artifact.kind == "logreg" || artifact.kind == "svm") {
    const auto& model = std::get<LinearModel>(artifact.model);
    for (const TokenSequence& doc : docs) {
      const LinearPrediction pred = linear_predict(model, featurize(doc));
      out.push_back({pred.label, model.kind == LinearKind::Logistic
                                     ? pred.probability
                                     : pred.score});
    }
  } else if (artifact.kind == "forest") {
    const auto& model = std::get<ForestModel>(artifact.model);
    for (const TokenSequence& doc : docs) {
      const EnsemblePrediction pred = ensemble_predict(model, featurize(doc));
      out.push_back({pred.label, pred.score});
    }
  } else if (artifact.kind == "boost") {
    const auto& model = std::get<BoostedModel>(artifact.model);
    for (const TokenSequence& doc : docs) {
      const EnsemblePrediction pred = ensemble_predict(model, featurize(doc));
      out.push_back({pred.label, pred.score});
    }
  } else if (artifact.kind == "encoder") {
    const auto& model = std::get<EncoderModel>(artifact.model);
    constexpr size_t kChunk = 64;
    for (size_t start = 0; start < docs.size(); start += kChunk) {
      const size_t end = std::min(docs.size(), start + kChunk);
      std::vector<TokenSequence> slice(docs.begin() + start, docs.begin() + end);
      Batch batch = make_batch(slice, artifact.feature.token_vocab,
                               model.config.max_len);
      ForwardResult result = encode_forward(model, batch);
      for (int64_t b = 0; b < batch.size; ++b) {
        const double fake = result.logits[b * 2 + 0];
        const double real = result.logits[b * 2 + 1];
        const double m = std::max(fake, real);
        const double p_fake =
            std::exp(fake - m) / (std::exp(fake - m) + std::exp(real - m));
        out.push_back({fake > real ? Label::Fake : Label::Real, p_fake});
      }
    }
  } else {
    throw ArtifactError("unknown model kind: " + artifact.kind);
  }
  return out;
}

}  // namespace

std::vector<Label> artifact_predict(const ModelArtifact& artifact,
                                    const std::vector<std::string>& texts) {
  std::vector<Scored> scored = evaluate_texts(artifact, texts);
  std::vector<Label> labels;
  labels.reserve(scored.size());
  for (const Scored& s : scored) labels.push_back(s.label);
  return labels;
}

std::vector<double> artifact_scores(const ModelArtifact& artifact,
                                    const std::vector<std::string>& texts) {
  std::vector<Scored> scored = evaluate_texts(artifact, texts);
  std::vector<double> scores;
  scores.reserve(scored.size());
  for (const Scored& s : scored) scores.push_back(s.score);
  return scores;
}

}  // namespace veritext
