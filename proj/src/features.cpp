#include "veritext/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "veritext/errors.hpp"

namespace veritext {

double dot(const SparseVector& x, const std::vector<double>& w) {
  double s = 0.0;
  for (size_t k = 0; k < x.idx.size(); ++k) s += x.val[k] * w[x.idx[k]];
  return s;
}

double l2_norm(const SparseVector& x) {
  double s = 0.0;
  for (double v : x.val) s += v * v;
  return std::sqrt(s);
}

SparseVector to_sparse(const std::vector<double>& dense) {
  SparseVector out;
  out.dim = static_cast<int64_t>(dense.size());
  for (size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.idx.push_back(static_cast<int32_t>(i));
      out.val.push_back(dense[i]);
    }
  }
  return out;
}

int32_t Vocabulary::find(const std::string& token) const {
  auto it = index.find(token);
  return it == index.end() ? -1 : it->second;
}

void Vocabulary::rebuild_index() {
  index.clear();
  index.reserve(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i)
    index.emplace(tokens[i], static_cast<int32_t>(i));
}

Vocabulary build_vocabulary(const std::vector<TokenSequence>& docs,
                            int64_t min_doc_freq) {
  // std::map keeps tokens lexicographically sorted, which fixes the index
  // assignment independently of document order hashing.
  std::map<std::string, std::pair<int64_t, int64_t>> stats;  // df, count
  std::vector<const std::string*> seen;
  for (const TokenSequence& doc : docs) {
    seen.clear();
    for (const std::string& tok : doc.tokens) {
      auto [it, fresh] = stats.emplace(tok, std::make_pair(int64_t{0}, int64_t{0}));
      it->second.second += 1;
      if (std::find_if(seen.begin(), seen.end(), [&](const std::string* s) {
            return *s == tok;
          }) == seen.end()) {
        it->second.first += 1;
        seen.push_back(&it->first);
      }
    }
  }
  Vocabulary vocab;
  vocab.total_docs = static_cast<int64_t>(docs.size());
  for (const auto& [tok, s] : stats) {
    if (s.first >= min_doc_freq) {
      vocab.tokens.push_back(tok);
      vocab.doc_freq.push_back(s.first);
      vocab.count.push_back(s.second);
    }
  }
  vocab.rebuild_index();
  return vocab;
}

Vocabulary build_frequency_vocabulary(const std::vector<TokenSequence>& docs,
                                      int64_t min_count) {
  std::map<std::string, std::pair<int64_t, int64_t>> stats;  // count, df
  for (const TokenSequence& doc : docs) {
    std::map<std::string, int64_t> local;
    for (const std::string& tok : doc.tokens) local[tok] += 1;
    for (const auto& [tok, c] : local) {
      auto& s = stats[tok];
      s.first += c;
      s.second += 1;
    }
  }
  struct Entry {
    const std::string* token;
    int64_t count;
    int64_t df;
  };
  std::vector<Entry> entries;
  for (const auto& [tok, s] : stats) {
    if (s.first >= min_count) entries.push_back({&tok, s.first, s.second});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.count != b.count) return a.count > b.count;
    return *a.token < *b.token;
  });
  Vocabulary vocab;
  vocab.total_docs = static_cast<int64_t>(docs.size());
  for (const Entry& e : entries) {
    vocab.tokens.push_back(*e.token);
    vocab.count.push_back(e.count);
    vocab.doc_freq.push_back(e.df);
  }
  vocab.rebuild_index();
  return vocab;
}

TfidfModel fit_tfidf(const std::vector<TokenSequence>& docs,
                     int64_t min_doc_freq) {
  if (docs.empty()) throw DomainError("fit_tfidf: empty corpus");
  TfidfModel model;
  model.vocab = build_vocabulary(docs, min_doc_freq);
  model.idf.resize(model.vocab.size());
  const double n = static_cast<double>(model.vocab.total_docs);
  for (size_t t = 0; t < model.vocab.size(); ++t) {
    model.idf[t] =
        std::log((1.0 + n) / (1.0 + static_cast<double>(model.vocab.doc_freq[t]))) +
        1.0;
  }
  return model;
}

SparseVector count_vector(const Vocabulary& vocab, const TokenSequence& doc) {
  std::map<int32_t, double> counts;
  for (const std::string& tok : doc.tokens) {
    int32_t t = vocab.find(tok);
    if (t >= 0) counts[t] += 1.0;
  }
  SparseVector out;
  out.dim = static_cast<int64_t>(vocab.size());
  out.idx.reserve(counts.size());
  out.val.reserve(counts.size());
  for (const auto& [t, c] : counts) {
    out.idx.push_back(t);
    out.val.push_back(c);
  }
  return out;
}

SparseVector transform_tfidf(const TfidfModel& model, const TokenSequence& doc) {
  SparseVector out = count_vector(model.vocab, doc);
  for (size_t k = 0; k < out.idx.size(); ++k) out.val[k] *= model.idf[out.idx[k]];
  double norm = l2_norm(out);
  if (norm > 0.0) {
    for (double& v : out.val) v /= norm;
  }
  return out;
}

std::vector<double> embed_mean(const EmbeddingTable& table,
                               const TokenSequence& doc) {
  std::vector<double> mean(table.dim, 0.0);
  int64_t hits = 0;
  for (const std::string& tok : doc.tokens) {
    int32_t t = table.vocab.find(tok);
    if (t < 0) continue;
    const double* row = table.input_row(t);
    for (int64_t j = 0; j < table.dim; ++j) mean[j] += row[j];
    ++hits;
  }
  if (hits > 0) {
    for (double& v : mean) v /= static_cast<double>(hits);
  }
  return mean;
}

void export_embeddings(const EmbeddingTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file: " + path);
  out << table.vocab.size() << ' ' << table.dim << '\n';
  char buf[64];
  for (size_t t = 0; t < table.vocab.size(); ++t) {
    out << table.vocab.tokens[t];
    const double* row = table.input_row(static_cast<int32_t>(t));
    for (int64_t j = 0; j < table.dim; ++j) {
      std::snprintf(buf, sizeof(buf), " %.9g", row[j]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace veritext
