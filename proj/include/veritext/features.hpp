#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "veritext/corpus.hpp"

namespace veritext {

/// Sparse feature vector: strictly increasing indices, nonzero finite values.
struct SparseVector {
  int64_t dim = 0;
  std::vector<int32_t> idx;
  std::vector<double> val;

  size_t nnz() const { return idx.size(); }
};

double dot(const SparseVector& x, const std::vector<double>& w);
double l2_norm(const SparseVector& x);
SparseVector to_sparse(const std::vector<double>& dense);

struct Vocabulary {
  std::vector<std::string> tokens;  // index -> token
  std::vector<int64_t> doc_freq;    // documents containing the token
  std::vector<int64_t> count;       // total corpus occurrences
  int64_t total_docs = 0;
  std::unordered_map<std::string, int32_t> index;

  size_t size() const { return tokens.size(); }
  /// Index of token, or -1 if out of vocabulary.
  int32_t find(const std::string& token) const;
  void rebuild_index();
};

/// Vocabulary over all tokens with document frequency >= min_doc_freq,
/// indices in lexicographic token order.
Vocabulary build_vocabulary(const std::vector<TokenSequence>& docs,
                            int64_t min_doc_freq = 1);

/// Vocabulary ordered by total corpus frequency (descending, ties broken
/// lexicographically) over tokens with total count >= min_count; the layout
/// word2vec and the encoder use.
Vocabulary build_frequency_vocabulary(const std::vector<TokenSequence>& docs,
                                      int64_t min_count = 1);

struct TfidfModel {
  Vocabulary vocab;
  std::vector<double> idf;  // idf[t] = ln((1+N)/(1+df[t])) + 1
};

/// Throws DomainError on an empty corpus.
TfidfModel fit_tfidf(const std::vector<TokenSequence>& docs,
                     int64_t min_doc_freq = 1);

/// Raw term counts over the vocabulary (the un-normalized count stage;
/// multinomial NB consumes this). OOV tokens are ignored.
SparseVector count_vector(const Vocabulary& vocab, const TokenSequence& doc);

/// Raw counts scaled by idf, then L2-normalized. Empty or all-OOV documents
/// map to the zero vector.
SparseVector transform_tfidf(const TfidfModel& model, const TokenSequence& doc);

struct EmbeddingTable {
  Vocabulary vocab;
  int64_t dim = 0;
  std::vector<double> input;   // V x dim, row-major; the vectors used downstream
  std::vector<double> output;  // V x dim context/target vectors

  const double* input_row(int32_t i) const { return input.data() + i * dim; }
};

/// Arithmetic mean of input vectors of in-vocabulary tokens; zero vector for
/// empty or all-OOV documents.
std::vector<double> embed_mean(const EmbeddingTable& table,
                               const TokenSequence& doc);

/// Plain text exchange format: first line "V d", then token + d decimals.
void export_embeddings(const EmbeddingTable& table, const std::string& path);

}  // namespace veritext
