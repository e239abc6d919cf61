#include "veritext/word2vec.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace veritext;

namespace {

TokenSequence seq(std::vector<std::string> tokens) {
  TokenSequence s;
  s.tokens = std::move(tokens);
  return s;
}

// Two disjoint co-occurrence clusters: {a,b} and {c,d}.
std::vector<TokenSequence> cluster_corpus() {
  std::vector<TokenSequence> docs;
  for (int i = 0; i < 40; ++i) {
    docs.push_back(seq({"a", "b", "a", "b", "a", "b"}));
    docs.push_back(seq({"c", "d", "c", "d", "c", "d"}));
  }
  return docs;
}

double cosine(const EmbeddingTable& t, const std::string& u, const std::string& v) {
  const double* a = t.input_row(t.vocab.find(u));
  const double* b = t.input_row(t.vocab.find(v));
  double dot = 0, na = 0, nb = 0;
  for (int64_t j = 0; j < t.dim; ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("default parameters produce a 300-dimension table") {
  Word2VecParams params;
  params.epochs = 1;
  params.min_count = 1;
  params.seed = 3;
  const EmbeddingTable table = train_word2vec({seq({"a", "b", "a", "b"})}, params);
  CHECK(table.dim == 300);
  CHECK(table.input.size() == table.vocab.size() * 300);
}

TEST_CASE("co-occurring tokens end up closer than non-co-occurring ones") {
  Word2VecParams params;
  params.dim = 16;
  params.epochs = 20;
  params.min_count = 1;
  params.seed = 11;
  const EmbeddingTable table = train_word2vec(cluster_corpus(), params);
  CHECK(cosine(table, "a", "b") > cosine(table, "a", "c"));
  CHECK(cosine(table, "c", "d") > cosine(table, "c", "b"));
}

TEST_CASE("training is bit-deterministic for a fixed seed") {
  Word2VecParams params;
  params.dim = 8;
  params.epochs = 3;
  params.min_count = 1;
  params.seed = 1234;
  const EmbeddingTable t1 = train_word2vec(cluster_corpus(), params);
  const EmbeddingTable t2 = train_word2vec(cluster_corpus(), params);
  CHECK(t1.input == t2.input);
  CHECK(t1.output == t2.output);

  params.seed = 1235;
  const EmbeddingTable t3 = train_word2vec(cluster_corpus(), params);
  CHECK(t1.input != t3.input);
}

TEST_CASE("negative-sampling loss decreases over the first epoch") {
  Word2VecParams params;
  params.dim = 16;
  params.min_count = 1;
  params.seed = 5;
  const std::vector<TokenSequence> docs = cluster_corpus();

  params.epochs = 0;
  const EmbeddingTable before = train_word2vec(docs, params);
  params.epochs = 1;
  const EmbeddingTable after = train_word2vec(docs, params);

  const double loss_before =
      sgns_corpus_loss(before, docs, params.window, params.negatives, 99);
  const double loss_after =
      sgns_corpus_loss(after, docs, params.window, params.negatives, 99);
  CHECK(loss_after < loss_before);
}

TEST_CASE("min_count filtering can empty the vocabulary") {
  Word2VecParams params;
  params.min_count = 50;
  CHECK_THROWS_AS(train_word2vec({seq({"a", "b"})}, params), DomainError);
  CHECK_THROWS_AS(train_word2vec({}, params), DomainError);
}

TEST_CASE("min_count keeps only frequent tokens") {
  Word2VecParams params;
  params.dim = 4;
  params.epochs = 1;
  params.min_count = 2;
  params.seed = 9;
  const EmbeddingTable table =
      train_word2vec({seq({"a", "b", "a"}), seq({"a", "rare"})}, params);
  CHECK(table.vocab.find("a") >= 0);
  CHECK(table.vocab.find("rare") == -1);
}

TEST_CASE("embedding export uses the plain text exchange format") {
  Word2VecParams params;
  params.dim = 4;
  params.epochs = 1;
  params.min_count = 1;
  params.seed = 2;
  const EmbeddingTable table =
      train_word2vec({seq({"alpha", "beta", "alpha"})}, params);
  vtest::TempDir dir;
  const std::string path = dir.file("vectors.txt");
  export_embeddings(table, path);
  std::istringstream in(vtest::read_file(path));
  std::string header;
  std::getline(in, header);
  CHECK(header == std::to_string(table.vocab.size()) + " 4");
  std::string line;
  size_t lines = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++lines;
  }
  CHECK(lines == table.vocab.size());
}
