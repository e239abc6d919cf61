#pragma once

#include <cstdint>
#include <vector>

#include "veritext/features.hpp"

namespace veritext {

struct Word2VecParams {
  int64_t dim = 300;
  int window = 5;        // dynamic window, actual radius uniform in [1, window]
  int negatives = 5;
  int epochs = 5;        // 0 is legal and returns the initialized table
  double lr = 0.025;     // decays linearly to lr/10 over training
  int64_t min_count = 2; // minimum total corpus frequency
  uint64_t seed = 1;
};

/// Skip-gram with negative sampling, single-threaded, bit-deterministic for a
/// given seed. Negatives are drawn from the unigram^0.75 distribution.
/// Throws DomainError if the vocabulary is empty after min_count filtering.
EmbeddingTable train_word2vec(const std::vector<TokenSequence>& docs,
                              const Word2VecParams& params);

/// Mean negative-sampling loss over every (context, center) pair of the
/// corpus at full window width, with negatives drawn from a stream seeded by
/// eval_seed only (so successive calls are comparable). Test instrumentation.
double sgns_corpus_loss(const EmbeddingTable& table,
                        const std::vector<TokenSequence>& docs, int window,
                        int negatives, uint64_t eval_seed);

}  // namespace veritext
