#include "veritext/features.hpp"

#include <cmath>
#include <map>

#include "doctest.h"
#include "veritext/rng.hpp"

using namespace veritext;

namespace {

TokenSequence seq(std::vector<std::string> tokens) {
  TokenSequence s;
  s.tokens = std::move(tokens);
  s.pipeline = Pipeline::Classic;
  return s;
}

// Independent dense oracle: count matrix, df recomputed from scratch,
// idf = ln((1+N)/(1+df)) + 1, rows L2-normalized.
std::vector<std::vector<double>> dense_tfidf_oracle(
    const std::vector<TokenSequence>& docs, const std::vector<std::string>& vocab) {
  const size_t n = docs.size(), v = vocab.size();
  std::vector<std::vector<double>> counts(n, std::vector<double>(v, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (const std::string& tok : docs[i].tokens) {
      for (size_t t = 0; t < v; ++t) {
        if (vocab[t] == tok) counts[i][t] += 1.0;
      }
    }
  }
  std::vector<double> df(v, 0.0);
  for (size_t t = 0; t < v; ++t) {
    for (size_t i = 0; i < n; ++i) {
      if (counts[i][t] > 0.0) df[t] += 1.0;
    }
  }
  for (size_t i = 0; i < n; ++i) {
    double norm2 = 0.0;
    for (size_t t = 0; t < v; ++t) {
      counts[i][t] *= std::log((1.0 + n) / (1.0 + df[t])) + 1.0;
      norm2 += counts[i][t] * counts[i][t];
    }
    if (norm2 > 0.0) {
      for (size_t t = 0; t < v; ++t) counts[i][t] /= std::sqrt(norm2);
    }
  }
  return counts;
}

std::vector<double> densify(const SparseVector& x) {
  std::vector<double> out(x.dim, 0.0);
  for (size_t k = 0; k < x.idx.size(); ++k) out[x.idx[k]] = x.val[k];
  return out;
}

}  // namespace

TEST_CASE("fit_tfidf idf values match the hand-evaluated formula") {
  const std::vector<TokenSequence> docs = {seq({"a", "b"}), seq({"a"})};
  const TfidfModel model = fit_tfidf(docs);
  REQUIRE(model.vocab.size() == 2);
  const int32_t a = model.vocab.find("a");
  const int32_t b = model.vocab.find("b");
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  CHECK(model.vocab.doc_freq[a] == 2);
  CHECK(model.vocab.doc_freq[b] == 1);
  CHECK(model.idf[a] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(model.idf[b] == doctest::Approx(std::log(1.5) + 1.0).epsilon(1e-12));

  // single doc: N = df forces idf = 1 exactly
  const TfidfModel single = fit_tfidf({seq({"a"})});
  CHECK(single.idf[0] == 1.0);

  // token present in every doc: idf = 1 exactly
  const TfidfModel all = fit_tfidf({seq({"x", "y"}), seq({"x"}), seq({"x", "z"})});
  CHECK(all.idf[all.vocab.find("x")] == 1.0);

  CHECK_THROWS_AS(fit_tfidf({}), DomainError);
}

TEST_CASE("transform_tfidf matches the documented example") {
  const TfidfModel model = fit_tfidf({seq({"a", "b"}), seq({"a"})});
  const SparseVector x = transform_tfidf(model, seq({"a", "a", "b"}));
  REQUIRE(x.nnz() == 2);
  const std::vector<double> dense = densify(x);
  const double idf_b = std::log(1.5) + 1.0;
  const double norm = std::sqrt(4.0 + idf_b * idf_b);
  CHECK(dense[model.vocab.find("a")] == doctest::Approx(2.0 / norm).epsilon(1e-12));
  CHECK(dense[model.vocab.find("b")] == doctest::Approx(idf_b / norm).epsilon(1e-12));
  CHECK(dense[model.vocab.find("a")] == doctest::Approx(0.818).epsilon(1e-3));
  CHECK(dense[model.vocab.find("b")] == doctest::Approx(0.575).epsilon(1e-3));
}

TEST_CASE("transform_tfidf degenerate documents give the zero vector") {
  const TfidfModel model = fit_tfidf({seq({"a", "b"}), seq({"a"})});
  CHECK(transform_tfidf(model, seq({})).nnz() == 0);
  CHECK(transform_tfidf(model, seq({"zzz", "qqq"})).nnz() == 0);
  CHECK(transform_tfidf(model, seq({})).dim == 2);
}

TEST_CASE("transform_tfidf output is unit-norm or exactly zero") {
  Rng rng(501);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "f"};
  std::vector<TokenSequence> docs;
  for (int i = 0; i < 12; ++i) {
    TokenSequence doc;
    const size_t len = rng.below(6);
    for (size_t j = 0; j < len; ++j)
      doc.tokens.push_back(alphabet[rng.below(alphabet.size())]);
    docs.push_back(doc);
  }
  docs.push_back(seq({"a"}));  // corpus vocabulary is never empty
  const TfidfModel model = fit_tfidf(docs);
  for (const TokenSequence& doc : docs) {
    const SparseVector x = transform_tfidf(model, doc);
    if (x.nnz() == 0) continue;
    CHECK(l2_norm(x) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("transform_tfidf is token-order invariant") {
  const TfidfModel model =
      fit_tfidf({seq({"a", "b", "c"}), seq({"a", "c"}), seq({"b"})});
  const SparseVector x1 = transform_tfidf(model, seq({"a", "b", "b", "c"}));
  const SparseVector x2 = transform_tfidf(model, seq({"c", "b", "a", "b"}));
  REQUIRE(x1.nnz() == x2.nnz());
  for (size_t k = 0; k < x1.nnz(); ++k) {
    CHECK(x1.idx[k] == x2.idx[k]);
    CHECK(x1.val[k] == x2.val[k]);
  }
}

TEST_CASE("tfidf pipeline equals the dense oracle within 1e-12") {
  Rng rng(77);
  const std::vector<std::string> alphabet = {"covid",  "cure", "cases", "#tag",
                                             "deaths", "wow",  "@who",  "report"};
  std::vector<TokenSequence> docs;
  for (int i = 0; i < 20; ++i) {
    TokenSequence doc;
    const size_t len = 1 + rng.below(10);
    for (size_t j = 0; j < len; ++j)
      doc.tokens.push_back(alphabet[rng.below(alphabet.size())]);
    docs.push_back(doc);
  }
  const TfidfModel model = fit_tfidf(docs);
  const auto oracle = dense_tfidf_oracle(docs, model.vocab.tokens);
  for (size_t i = 0; i < docs.size(); ++i) {
    const std::vector<double> got = densify(transform_tfidf(model, docs[i]));
    REQUIRE(got.size() == oracle[i].size());
    for (size_t t = 0; t < got.size(); ++t)
      CHECK(got[t] == doctest::Approx(oracle[i][t]).epsilon(1e-12));
  }
}

TEST_CASE("count_vector returns raw term counts and skips OOV") {
  const TfidfModel model = fit_tfidf({seq({"a", "b"}), seq({"a"})});
  const SparseVector x = count_vector(model.vocab, seq({"a", "a", "b", "oov"}));
  const std::vector<double> dense = densify(x);
  CHECK(dense[model.vocab.find("a")] == 2.0);
  CHECK(dense[model.vocab.find("b")] == 1.0);
}

TEST_CASE("vocabulary min_doc_freq filters rare tokens") {
  const Vocabulary vocab =
      build_vocabulary({seq({"a", "b"}), seq({"a"}), seq({"a", "c"})}, 2);
  CHECK(vocab.size() == 1);
  CHECK(vocab.find("a") == 0);
  CHECK(vocab.find("b") == -1);
}

TEST_CASE("frequency vocabulary orders by count then token") {
  const Vocabulary vocab =
      build_frequency_vocabulary({seq({"b", "b", "a", "a", "c"}), seq({"b"})}, 1);
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.tokens[0] == "b");  // count 3
  CHECK(vocab.tokens[1] == "a");  // count 2
  CHECK(vocab.tokens[2] == "c");  // count 1
  CHECK(vocab.count[0] == 3);
  CHECK(vocab.doc_freq[0] == 2);
}

TEST_CASE("embed_mean averages in-vocabulary vectors") {
  EmbeddingTable table;
  table.vocab = build_vocabulary({seq({"a"}), seq({"b"})});
  table.dim = 3;
  table.input = {1.0, 0.0, 2.0,   // a
                 0.0, 1.0, 4.0};  // b
  REQUIRE(table.vocab.find("a") == 0);  // lexicographic

  CHECK(embed_mean(table, seq({"a", "b"})) == std::vector<double>{0.5, 0.5, 3.0});
  CHECK(embed_mean(table, seq({})) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(embed_mean(table, seq({"zzz"})) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(embed_mean(table, seq({"a", "a"})) == std::vector<double>{1.0, 0.0, 2.0});
}

TEST_CASE("embed_mean stays in the componentwise convex hull") {
  Rng rng(42);
  EmbeddingTable table;
  table.vocab = build_vocabulary({seq({"a"}), seq({"b"}), seq({"c"}), seq({"d"})});
  table.dim = 5;
  table.input.resize(table.vocab.size() * table.dim);
  for (double& v : table.input) v = rng.normal(0.0, 1.0);

  const std::vector<std::string> names = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 50; ++trial) {
    TokenSequence doc;
    const size_t len = 1 + rng.below(6);
    for (size_t j = 0; j < len; ++j)
      doc.tokens.push_back(names[rng.below(names.size())]);
    const std::vector<double> mean = embed_mean(table, doc);
    for (int64_t dim = 0; dim < table.dim; ++dim) {
      double lo = 1e30, hi = -1e30;
      for (const std::string& tok : doc.tokens) {
        const double v = table.input[table.vocab.find(tok) * table.dim + dim];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(mean[dim] >= lo - 1e-12);
      CHECK(mean[dim] <= hi + 1e-12);
    }
  }
}

TEST_CASE("sparse helpers") {
  const SparseVector x = to_sparse({0.0, 2.0, 0.0, -1.5});
  CHECK(x.dim == 4);
  CHECK(x.idx == std::vector<int32_t>{1, 3});
  CHECK(x.val == std::vector<double>{2.0, -1.5});
  CHECK(dot(x, {1.0, 1.0, 1.0, 2.0}) == doctest::Approx(-1.0));
  CHECK(l2_norm(x) == doctest::Approx(2.5));
}
