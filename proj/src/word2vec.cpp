#include "veritext/word2vec.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "veritext/errors.hpp"
#include "veritext/rng.hpp"

namespace veritext {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// -log(sigmoid(x)), computed stably.
double neg_log_sigmoid(double x) {
  if (x >= 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

std::vector<std::vector<int32_t>> index_docs(const Vocabulary& vocab,
                                             const std::vector<TokenSequence>& docs) {
  std::vector<std::vector<int32_t>> out;
  out.reserve(docs.size());
  for (const TokenSequence& doc : docs) {
    std::vector<int32_t> seq;
    seq.reserve(doc.tokens.size());
    for (const std::string& tok : doc.tokens) {
      int32_t t = vocab.find(tok);
      if (t >= 0) seq.push_back(t);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

// Cumulative unigram^0.75 table for negative sampling.
std::vector<double> negative_cdf(const Vocabulary& vocab) {
  std::vector<double> cdf(vocab.size());
  double z = 0.0;
  for (size_t t = 0; t < vocab.size(); ++t) {
    z += std::pow(static_cast<double>(vocab.count[t]), 0.75);
    cdf[t] = z;
  }
  for (double& v : cdf) v /= z;
  cdf.back() = 1.0;
  return cdf;
}

int32_t sample_negative(const std::vector<double>& cdf, Rng& rng) {
  double u = rng.uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int32_t>(it - cdf.begin());
}

}  // namespace

EmbeddingTable train_word2vec(const std::vector<TokenSequence>& docs,
                              const Word2VecParams& params) {
  if (docs.empty()) throw DomainError("train_word2vec: empty corpus");
  EmbeddingTable table;
  table.vocab = build_frequency_vocabulary(docs, params.min_count);
  table.dim = params.dim;
  const int64_t v = static_cast<int64_t>(table.vocab.size());
  const int64_t d = params.dim;
  if (v == 0)
    throw DomainError("train_word2vec: vocabulary empty after min_count filtering");

  Rng init_rng(mix_seed(params.seed, 0x77327632));
  table.input.resize(v * d);
  table.output.assign(v * d, 0.0);
  for (double& x : table.input) x = init_rng.uniform(-0.5 / d, 0.5 / d);

  std::vector<std::vector<int32_t>> seqs = index_docs(table.vocab, docs);
  int64_t total_positions = 0;
  for (const auto& s : seqs) total_positions += static_cast<int64_t>(s.size());
  if (total_positions == 0 || params.epochs == 0) return table;

  const std::vector<double> cdf = negative_cdf(table.vocab);
  Rng rng(mix_seed(params.seed, 0x5eed1));
  std::vector<double> hidden_grad(d);

  const int64_t schedule_total = total_positions * params.epochs;
  int64_t processed = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (const std::vector<int32_t>& seq : seqs) {
      const int64_t len = static_cast<int64_t>(seq.size());
      for (int64_t pos = 0; pos < len; ++pos) {
        double alpha =
            params.lr * (1.0 - 0.9 * static_cast<double>(processed) /
                                   static_cast<double>(schedule_total));
        ++processed;
        const int32_t center = seq[pos];
        const int64_t radius = 1 + static_cast<int64_t>(rng.below(params.window));
        for (int64_t off = -radius; off <= radius; ++off) {
          if (off == 0) continue;
          const int64_t j = pos + off;
          if (j < 0 || j >= len) continue;
          const int32_t context = seq[j];
          double* in = table.input.data() + static_cast<int64_t>(context) * d;
          std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
          for (int k = 0; k <= params.negatives; ++k) {
            int32_t target;
            double label;
            if (k == 0) {
              target = center;
              label = 1.0;
            } else {
              target = sample_negative(cdf, rng);
              if (target == center) continue;
              label = 0.0;
            }
            double* out = table.output.data() + static_cast<int64_t>(target) * d;
            double f = 0.0;
            for (int64_t q = 0; q < d; ++q) f += in[q] * out[q];
            const double g = (label - sigmoid(f)) * alpha;
            for (int64_t q = 0; q < d; ++q) {
              hidden_grad[q] += g * out[q];
              out[q] += g * in[q];
            }
          }
          for (int64_t q = 0; q < d; ++q) in[q] += hidden_grad[q];
        }
      }
    }
  }
  return table;
}

double sgns_corpus_loss(const EmbeddingTable& table,
                        const std::vector<TokenSequence>& docs, int window,
                        int negatives, uint64_t eval_seed) {
  std::vector<std::vector<int32_t>> seqs = index_docs(table.vocab, docs);
  const std::vector<double> cdf = negative_cdf(table.vocab);
  Rng rng(mix_seed(eval_seed, 0xeba1));
  const int64_t d = table.dim;
  double loss = 0.0;
  int64_t pairs = 0;
  for (const std::vector<int32_t>& seq : seqs) {
    const int64_t len = static_cast<int64_t>(seq.size());
    for (int64_t pos = 0; pos < len; ++pos) {
      const int32_t center = seq[pos];
      for (int64_t off = -window; off <= window; ++off) {
        if (off == 0) continue;
        const int64_t j = pos + off;
        if (j < 0 || j >= len) continue;
        const int32_t context = seq[j];
        const double* in = table.input.data() + static_cast<int64_t>(context) * d;
        const double* cen = table.output.data() + static_cast<int64_t>(center) * d;
        double f = 0.0;
        for (int64_t q = 0; q < d; ++q) f += in[q] * cen[q];
        loss += neg_log_sigmoid(f);
        for (int k = 0; k < negatives; ++k) {
          int32_t target = sample_negative(cdf, rng);
          if (target == center) continue;
          const double* out = table.output.data() + static_cast<int64_t>(target) * d;
          double fn = 0.0;
          for (int64_t q = 0; q < d; ++q) fn += in[q] * out[q];
          loss += neg_log_sigmoid(-fn);
        }
        ++pairs;
      }
    }
  }
  return pairs == 0 ? 0.0 : loss / static_cast<double>(pairs);
}

}  // namespace veritext
