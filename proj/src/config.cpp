#include "veritext/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "veritext/errors.hpp"
#include "veritext/rng.hpp"

namespace veritext {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad seed value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: bad boolean value for " + key + ": '" + value + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kMethods[] = {"nb", "logreg", "forest", "boost", "svm", "encoder"};
const char* kFeatures[] = {"tfidf", "word2vec", "tokens"};

void parse_cells(const std::string& value,
                 std::vector<std::pair<std::string, std::string>>& cells) {
  cells.clear();
  std::istringstream in(value);
  std::string item;
  while (in >> item) {
    const size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("config: experiment.cells entries must be method:features, got '" +
                        item + "'");
    std::string method = item.substr(0, colon);
    std::string features = item.substr(colon + 1);
    bool ok_m = false, ok_f = false;
    for (const char* m : kMethods) ok_m |= method == m;
    for (const char* f : kFeatures) ok_f |= features == f;
    if (!ok_m) throw ConfigError("config: unknown method '" + method + "'");
    if (!ok_f) throw ConfigError("config: unknown features '" + features + "'");
    cells.emplace_back(std::move(method), std::move(features));
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::default_cells() {
  return {{"nb", "tfidf"},        {"logreg", "tfidf"},  {"forest", "tfidf"},
          {"boost", "tfidf"},     {"svm", "tfidf"},     {"logreg", "word2vec"},
          {"forest", "word2vec"}, {"boost", "word2vec"}, {"svm", "word2vec"},
          {"encoder", "tokens"}};
}

ExperimentConfig::ExperimentConfig() {
  cells = default_cells();
  encoder.seed = 0;  // resolved via component_seed at training time
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "data.train") cfg.train_path = value;
    else if (qual == "data.validation") cfg.validation_path = value;
    else if (qual == "data.test") cfg.test_path = value;
    else if (qual == "split.ratio") cfg.split_ratio = parse_double(qual, value);
    else if (qual == "split.seed") {
      cfg.split_seed = parse_u64(qual, value);
      cfg.split_seed_set = true;
    }
    else if (qual == "preprocess.baseline_pipeline") cfg.baseline_pipeline = parse_pipeline(value);
    else if (qual == "preprocess.encoder_pipeline") cfg.encoder_pipeline = parse_pipeline(value);
    else if (qual == "tfidf.min_df") cfg.tfidf_min_df = parse_int(qual, value);
    else if (qual == "word2vec.dim") cfg.word2vec.dim = parse_int(qual, value);
    else if (qual == "word2vec.window") cfg.word2vec.window = static_cast<int>(parse_int(qual, value));
    else if (qual == "word2vec.negatives") cfg.word2vec.negatives = static_cast<int>(parse_int(qual, value));
    else if (qual == "word2vec.epochs") cfg.word2vec.epochs = static_cast<int>(parse_int(qual, value));
    else if (qual == "word2vec.lr") cfg.word2vec.lr = parse_double(qual, value);
    else if (qual == "word2vec.min_count") cfg.word2vec.min_count = parse_int(qual, value);
    else if (qual == "nb.alpha") cfg.nb_alpha = parse_double(qual, value);
    else if (qual == "logreg.lambda") cfg.logreg.lambda = parse_double(qual, value);
    else if (qual == "logreg.lr") cfg.logreg.lr = parse_double(qual, value);
    else if (qual == "logreg.epochs") cfg.logreg.epochs = static_cast<int>(parse_int(qual, value));
    else if (qual == "svm.lambda") cfg.svm.lambda = parse_double(qual, value);
    else if (qual == "svm.epochs") cfg.svm.epochs = static_cast<int>(parse_int(qual, value));
    else if (qual == "forest.n_trees") cfg.forest.n_trees = static_cast<int>(parse_int(qual, value));
    else if (qual == "forest.max_depth") cfg.forest.max_depth = static_cast<int>(parse_int(qual, value));
    else if (qual == "forest.max_depth_tfidf") cfg.forest_max_depth_tfidf = static_cast<int>(parse_int(qual, value));
    else if (qual == "forest.min_leaf") cfg.forest.min_leaf = parse_int(qual, value);
    else if (qual == "forest.feature_subset") cfg.forest.feature_subset = parse_int(qual, value);
    else if (qual == "forest.bootstrap") cfg.forest.bootstrap = parse_bool(qual, value);
    else if (qual == "boost.rounds") cfg.boost.rounds = static_cast<int>(parse_int(qual, value));
    else if (qual == "boost.eta") cfg.boost.eta = parse_double(qual, value);
    else if (qual == "boost.max_depth") cfg.boost.max_depth = static_cast<int>(parse_int(qual, value));
    else if (qual == "boost.lambda_reg") cfg.boost.lambda_reg = parse_double(qual, value);
    else if (qual == "encoder.d_model") cfg.encoder.d_model = static_cast<int>(parse_int(qual, value));
    else if (qual == "encoder.heads") cfg.encoder.heads = static_cast<int>(parse_int(qual, value));
    else if (qual == "encoder.layers") cfg.encoder.layers = static_cast<int>(parse_int(qual, value));
    else if (qual == "encoder.d_ff") cfg.encoder.d_ff = static_cast<int>(parse_int(qual, value));
    else if (qual == "encoder.max_len") cfg.encoder.max_len = static_cast<int>(parse_int(qual, value));
    else if (qual == "encoder.epochs") cfg.encoder_train.epochs = static_cast<int>(parse_int(qual, value));
    else if (qual == "encoder.batch") cfg.encoder_train.batch = static_cast<int>(parse_int(qual, value));
    else if (qual == "encoder.lr") cfg.encoder_train.lr = parse_double(qual, value);
    else if (qual == "encoder.min_count") cfg.encoder_train.min_count = parse_int(qual, value);
    else if (qual == "experiment.cells") parse_cells(value, cfg.cells);
    else if (qual == "experiment.eval_split") {
      if (value != "validation" && value != "test")
        throw ConfigError("config: experiment.eval_split must be validation or test");
      cfg.eval_split = value;
    }
    else if (qual == "experiment.output_csv") cfg.output_csv = value;
    else if (qual == "experiment.output_table") cfg.output_table = value;
    else if (qual == "seed.global") cfg.global_seed = parse_u64(qual, value);
    else throw ConfigError(origin + ":" + std::to_string(line_no) +
                           ": unknown config key '" + qual + "'");
  }
  if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0))
    throw ConfigError("config: split.ratio must be strictly between 0 and 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string config_snapshot(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[data]\n";
  out << "train = " << c.train_path << "\n";
  out << "validation = " << c.validation_path << "\n";
  out << "test = " << c.test_path << "\n";
  out << "[split]\n";
  out << "ratio = " << format_double(c.split_ratio) << "\n";
  out << "seed = " << (c.split_seed_set ? c.split_seed : c.global_seed) << "\n";
  out << "[preprocess]\n";
  out << "baseline_pipeline = " << to_string(c.baseline_pipeline) << "\n";
  out << "encoder_pipeline = " << to_string(c.encoder_pipeline) << "\n";
  out << "[tfidf]\n";
  out << "min_df = " << c.tfidf_min_df << "\n";
  out << "[word2vec]\n";
  out << "dim = " << c.word2vec.dim << "\n";
  out << "window = " << c.word2vec.window << "\n";
  out << "negatives = " << c.word2vec.negatives << "\n";
  out << "epochs = " << c.word2vec.epochs << "\n";
  out << "lr = " << format_double(c.word2vec.lr) << "\n";
  out << "min_count = " << c.word2vec.min_count << "\n";
  out << "[nb]\n";
  out << "alpha = " << format_double(c.nb_alpha) << "\n";
  out << "[logreg]\n";
  out << "lambda = " << format_double(c.logreg.lambda) << "\n";
  out << "lr = " << format_double(c.logreg.lr) << "\n";
  out << "epochs = " << c.logreg.epochs << "\n";
  out << "[svm]\n";
  out << "lambda = " << format_double(c.svm.lambda) << "\n";
  out << "epochs = " << c.svm.epochs << "\n";
  out << "[forest]\n";
  out << "n_trees = " << c.forest.n_trees << "\n";
  out << "max_depth = " << c.forest.max_depth << "\n";
  out << "max_depth_tfidf = " << c.forest_max_depth_tfidf << "\n";
  out << "min_leaf = " << c.forest.min_leaf << "\n";
  out << "feature_subset = " << c.forest.feature_subset << "\n";
  out << "bootstrap = " << (c.forest.bootstrap ? "true" : "false") << "\n";
  out << "[boost]\n";
  out << "rounds = " << c.boost.rounds << "\n";
  out << "eta = " << format_double(c.boost.eta) << "\n";
  out << "max_depth = " << c.boost.max_depth << "\n";
  out << "lambda_reg = " << format_double(c.boost.lambda_reg) << "\n";
  out << "[encoder]\n";
  out << "d_model = " << c.encoder.d_model << "\n";
  out << "heads = " << c.encoder.heads << "\n";
  out << "layers = " << c.encoder.layers << "\n";
  out << "d_ff = " << c.encoder.d_ff << "\n";
  out << "max_len = " << c.encoder.max_len << "\n";
  out << "epochs = " << c.encoder_train.epochs << "\n";
  out << "batch = " << c.encoder_train.batch << "\n";
  out << "lr = " << format_double(c.encoder_train.lr) << "\n";
  out << "min_count = " << c.encoder_train.min_count << "\n";
  out << "[experiment]\n";
  out << "cells =";
  for (const auto& [m, f] : c.cells) out << " " << m << ":" << f;
  out << "\n";
  out << "eval_split = " << c.eval_split << "\n";
  out << "output_csv = " << c.output_csv << "\n";
  out << "output_table = " << c.output_table << "\n";
  out << "[seed]\n";
  out << "global = " << c.global_seed << "\n";
  return out.str();
}

uint64_t component_seed(const ExperimentConfig& config, const std::string& name) {
  return mix_seed(config.global_seed, fnv1a64(name.data(), name.size()));
}

}  // namespace veritext
