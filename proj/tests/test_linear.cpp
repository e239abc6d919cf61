#include "veritext/linear.hpp"

#include <cmath>

#include "doctest.h"
#include "veritext/rng.hpp"

using namespace veritext;

namespace {

TokenSequence seq(std::vector<std::string> tokens) {
  TokenSequence s;
  s.tokens = std::move(tokens);
  return s;
}

SparseVector vec(std::vector<double> dense) { return to_sparse(dense); }

// Brute-force Bayes oracle over dense count matrices: smoothed theta and the
// two-class posterior computed directly from the definition.
struct NbOracle {
  double prior[2];
  std::vector<std::vector<double>> theta;  // [class][term]

  NbOracle(const std::vector<std::vector<double>>& x, const std::vector<Label>& y,
           double alpha) {
    const size_t v = x[0].size();
    double docs[2] = {0, 0};
    std::vector<std::vector<double>> count(2, std::vector<double>(v, 0.0));
    for (size_t i = 0; i < x.size(); ++i) {
      const size_t c = static_cast<size_t>(y[i]);
      docs[c] += 1;
      for (size_t t = 0; t < v; ++t) count[c][t] += x[i][t];
    }
    theta.assign(2, std::vector<double>(v, 0.0));
    for (size_t c = 0; c < 2; ++c) {
      prior[c] = docs[c] / static_cast<double>(x.size());
      double total = alpha * static_cast<double>(v);
      for (size_t t = 0; t < v; ++t) total += count[c][t];
      for (size_t t = 0; t < v; ++t) theta[c][t] = (count[c][t] + alpha) / total;
    }
  }

  // posterior over [fake, real] for a count vector
  std::array<double, 2> posterior(const std::vector<double>& x) const {
    double log_score[2];
    for (size_t c = 0; c < 2; ++c) {
      log_score[c] = std::log(prior[c]);
      for (size_t t = 0; t < x.size(); ++t)
        log_score[c] += x[t] * std::log(theta[c][t]);
    }
    const double m = std::max(log_score[0], log_score[1]);
    const double e0 = std::exp(log_score[0] - m);
    const double e1 = std::exp(log_score[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
  }
};

// the documented toy corpus: one fake，one real post
struct NbToy {
  Vocabulary vocab;
  std::vector<SparseVector> counts;
  std::vector<std::vector<double>> dense;
  std::vector<Label> labels{Label::Fake, Label::Real};

  NbToy() {
    const std::vector<TokenSequence> docs = {seq({"cheap", "cure", "miracle"}),
                                             seq({"cdc", "reports", "deaths"})};
    vocab = build_vocabulary(docs);
    for (const TokenSequence& doc : docs) {
      counts.push_back(count_vector(vocab, doc));
      std::vector<double> row(vocab.size(), 0.0);
      for (size_t k = 0; k < counts.back().idx.size(); ++k)
        row[counts.back().idx[k]] = counts.back().val[k];
      dense.push_back(row);
    }
  }

  std::vector<double> densify(const SparseVector& x) const {
    std::vector<double> row(vocab.size(), 0.0);
    for (size_t k = 0; k < x.idx.size(); ++k) row[x.idx[k]] = x.val[k];
    return row;
  }
};

std::vector<SparseVector> two_point_1d() {
  return {vec({-1.0}), vec({1.0})};
}
const std::vector<Label> two_point_labels = {Label::Real, Label::Fake};

}  // namespace

TEST_CASE("nb posterior matches brute-force enumeration within 1e-12") {
  NbToy toy;
  const NaiveBayesModel model = nb_fit(toy.counts, toy.labels, 1.0);
  const NbOracle oracle(toy.dense, toy.labels, 1.0);

  const SparseVector query = count_vector(toy.vocab, seq({"cheap", "cure"}));
  const NbPrediction pred = nb_predict(model, query);
  const auto expect = oracle.posterior(toy.densify(query));
  CHECK(pred.label == Label::Fake);
  CHECK(pred.posterior[0] == doctest::Approx(expect[0]).epsilon(1e-12));
  CHECK(pred.posterior[1] == doctest::Approx(expect[1]).epsilon(1e-12));

  // broader sweep on a generated <= 20 doc corpus
  Rng rng(8);
  std::vector<std::vector<double>> dense;
  std::vector<SparseVector> sparse;
  std::vector<Label> labels;
  const size_t v = 7;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> row(v, 0.0);
    const size_t terms = 1 + rng.below(5);
    for (size_t k = 0; k < terms; ++k) row[rng.below(v)] += 1.0;
    dense.push_back(row);
    sparse.push_back(to_sparse(row));
    labels.push_back(rng.below(2) == 0 ? Label::Fake : Label::Real);
  }
  labels[0] = Label::Fake;
  labels[1] = Label::Real;
  const NaiveBayesModel big = nb_fit(sparse, labels, 0.7);
  const NbOracle big_oracle(dense, labels, 0.7);
  for (size_t i = 0; i < sparse.size(); ++i) {
    const NbPrediction p = nb_predict(big, sparse[i]);
    const auto e = big_oracle.posterior(dense[i]);
    CHECK(p.posterior[0] == doctest::Approx(e[0]).epsilon(1e-12));
    CHECK(p.posterior[1] == doctest::Approx(e[1]).epsilon(1e-12));
  }
}

TEST_CASE("nb model invariants hold after fitting") {
  NbToy toy;
  const NaiveBayesModel model = nb_fit(toy.counts, toy.labels, 1.0);
  CHECK(std::exp(model.log_prior[0]) + std::exp(model.log_prior[1]) ==
        doctest::Approx(1.0).epsilon(1e-12));
  for (size_t c = 0; c < 2; ++c) {
    double row_sum = 0.0;
    for (int64_t t = 0; t < model.vocab_size; ++t)
      row_sum += std::exp(model.log_likelihood[c * model.vocab_size + t]);
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("nb rejects bad inputs") {
  NbToy toy;
  CHECK_THROWS_AS(nb_fit(toy.counts, {Label::Fake, Label::Fake}, 1.0), DomainError);
  CHECK_THROWS_AS(nb_fit(toy.counts, toy.labels, 0.0), DomainError);
  CHECK_THROWS_AS(nb_fit(toy.counts, toy.labels, -1.0), DomainError);

  const NaiveBayesModel model = nb_fit(toy.counts, toy.labels, 1.0);
  SparseVector wrong;
  wrong.dim = 3;
  CHECK_THROWS_AS(nb_predict(model, wrong), DomainError);
}

TEST_CASE("large alpha drives posteriors toward the class priors") {
  NbToy toy;
  const NaiveBayesModel model = nb_fit(toy.counts, toy.labels, 1e6);
  const NbPrediction pred =
      nb_predict(model, count_vector(toy.vocab, seq({"cheap", "cure"})));
  CHECK(pred.posterior[0] == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(pred.posterior[1] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("nb zero vector falls back to the priors; ties go to REAL") {
  // unequal priors: 2 fake docs, 1 real
  std::vector<SparseVector> x = {vec({1.0, 0.0}), vec({0.0, 1.0}), vec({1.0, 1.0})};
  std::vector<Label> y = {Label::Fake, Label::Fake, Label::Real};
  const NaiveBayesModel model = nb_fit(x, y, 1.0);
  SparseVector zero;
  zero.dim = 2;
  CHECK(nb_predict(model, zero).label == Label::Fake);

  // equal priors: exact tie on the zero vector resolves to REAL
  NbToy toy;
  const NaiveBayesModel tied = nb_fit(toy.counts, toy.labels, 1.0);
  SparseVector zero6;
  zero6.dim = static_cast<int64_t>(toy.vocab.size());
  CHECK(nb_predict(tied, zero6).label == Label::Real);
  CHECK(nb_predict(tied, zero6).posterior[0] +
            nb_predict(tied, zero6).posterior[1] ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nb decision is invariant to scaling counts when priors are equal") {
  NbToy toy;
  const NaiveBayesModel model = nb_fit(toy.counts, toy.labels, 1.0);
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> row(toy.vocab.size(), 0.0);
    const size_t terms = 1 + rng.below(4);
    for (size_t k = 0; k < terms; ++k) row[rng.below(toy.vocab.size())] += 1.0;
    const Label base = nb_predict(model, to_sparse(row)).label;
    for (double scale : {2.0, 5.0}) {
      std::vector<double> scaled = row;
      for (double& v : scaled) v *= scale;
      CHECK(nb_predict(model, to_sparse(scaled)).label == base);
    }
  }
}

TEST_CASE("logreg zero initialization predicts 0.5 everywhere") {
  LinearModel model;
  model.kind = LinearKind::Logistic;
  model.weights = {0.0, 0.0};
  const LinearPrediction pred = linear_predict(model, vec({3.0, -2.0}));
  CHECK(pred.score == 0.0);
  CHECK(pred.probability == 0.5);
  CHECK(pred.label == Label::Real);
}

TEST_CASE("logreg separates the 1-d two-point problem") {
  LogregParams params;
  auto [model, log] = logreg_fit(two_point_1d(), two_point_labels, params);
  CHECK(log.epochs() == 100);
  CHECK(linear_predict(model, vec({1.0})).label == Label::Fake);
  CHECK(linear_predict(model, vec({-1.0})).label == Label::Real);
}

TEST_CASE("logreg analytic gradient matches central finite differences") {
  Rng rng(404);
  const int64_t n = 5, d = 4;
  std::vector<SparseVector> x;
  std::vector<Label> y;
  for (int64_t i = 0; i < n; ++i) {
    std::vector<double> row(d);
    for (double& v : row) v = rng.normal(0.0, 1.0);
    x.push_back(to_sparse(row));
    y.push_back(i % 2 ? Label::Real : Label::Fake);
  }
  std::vector<double> w(d);
  for (double& v : w) v = rng.normal(0.0, 0.7);
  double b = 0.3;
  const double lambda = 1e-4;

  std::vector<double> grad_w;
  double grad_b;
  logreg_gradient(w, b, x, y, lambda, grad_w, grad_b);

  const double h = 1e-6;
  for (int64_t j = 0; j < d; ++j) {
    std::vector<double> wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    const double numeric =
        (logreg_objective(wp, b, x, y, lambda) - logreg_objective(wm, b, x, y, lambda)) /
        (2.0 * h);
    const double denom = std::max({std::fabs(numeric), std::fabs(grad_w[j]), 1e-3});
    CHECK(std::fabs(numeric - grad_w[j]) / denom < 1e-6);
  }
  const double numeric_b =
      (logreg_objective(w, b + h, x, y, lambda) - logreg_objective(w, b - h, x, y, lambda)) /
      (2.0 * h);
  CHECK(std::fabs(numeric_b - grad_b) /
            std::max({std::fabs(numeric_b), std::fabs(grad_b), 1e-3}) <
        1e-6);
}

TEST_CASE("logreg objective is non-increasing under the safe step size") {
  Rng rng(17);
  std::vector<SparseVector> x;
  std::vector<Label> y;
  double max_norm2 = 0.0;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> row(3);
    for (double& v : row) v = rng.normal(0.0, 1.0);
    double n2 = 0;
    for (double v : row) n2 += v * v;
    max_norm2 = std::max(max_norm2, n2);
    x.push_back(to_sparse(row));
    y.push_back(rng.below(2) ? Label::Real : Label::Fake);
  }
  y[0] = Label::Fake;
  y[1] = Label::Real;
  LogregParams params;
  params.lr = 0.25 / (max_norm2 + params.lambda);
  params.epochs = 60;
  auto [model, log] = logreg_fit(x, y, params);
  for (size_t e = 1; e < log.objective.size(); ++e)
    CHECK(log.objective[e] <= log.objective[e - 1] + 1e-12);
}

TEST_CASE("svm separates the two-point problem and logs the objective") {
  SvmParams params;
  params.seed = 3;
  auto [model, log] = svm_fit(two_point_1d(), two_point_labels, params);
  CHECK(log.epochs() == 20);
  CHECK(linear_predict(model, vec({1.0})).label == Label::Fake);
  CHECK(linear_predict(model, vec({-1.0})).label == Label::Real);
}

TEST_CASE("svm zero-vector margin equals the bias; b = 0 decides REAL") {
  LinearModel model;
  model.kind = LinearKind::Svm;
  model.weights = {1.0, 1.0};
  model.bias = 0.0;
  SparseVector zero;
  zero.dim = 2;
  const LinearPrediction pred = linear_predict(model, zero);
  CHECK(pred.score == 0.0);
  CHECK(pred.label == Label::Real);

  model.bias = 0.25;
  CHECK(linear_predict(model, zero).score == 0.25);
  CHECK(linear_predict(model, zero).label == Label::Fake);
}

TEST_CASE("svm training-set labels survive doubling the inputs") {
  SvmParams params;
  params.seed = 5;
  auto [model, log1] = svm_fit(two_point_1d(), two_point_labels, params);
  std::vector<SparseVector> doubled = {vec({-2.0}), vec({2.0})};
  auto [model2, log2] = svm_fit(doubled, two_point_labels, params);
  for (size_t i = 0; i < doubled.size(); ++i) {
    CHECK(linear_predict(model, two_point_1d()[i]).label ==
          linear_predict(model2, doubled[i]).label);
  }
}

TEST_CASE("fits are bit-deterministic in the seed") {
  Rng rng(61);
  std::vector<SparseVector> x;
  std::vector<Label> y;
  for (int i = 0; i < 10; ++i) {
    std::vector<double> row(4);
    for (double& v : row) v = rng.normal(0.0, 1.0);
    x.push_back(to_sparse(row));
    y.push_back(i % 2 ? Label::Real : Label::Fake);
  }
  SvmParams sp;
  sp.seed = 77;
  auto [m1, l1] = svm_fit(x, y, sp);
  auto [m2, l2] = svm_fit(x, y, sp);
  CHECK(m1.weights == m2.weights);
  CHECK(m1.bias == m2.bias);
  CHECK(l1.objective == l2.objective);

  LogregParams lp;
  auto [g1, gl1] = logreg_fit(x, y, lp);
  auto [g2, gl2] = logreg_fit(x, y, lp);
  CHECK(g1.weights == g2.weights);
  CHECK(g1.bias == g2.bias);
}

TEST_CASE("linear_predict arithmetic and tie rules") {
  LinearModel model;
  model.kind = LinearKind::Svm;
  model.weights = {1.0, -1.0};
  model.bias = 0.0;
  const LinearPrediction pred = linear_predict(model, vec({3.0, 1.0}));
  CHECK(pred.score == doctest::Approx(2.0));
  CHECK(pred.label == Label::Fake);

  LinearModel zero;
  zero.kind = LinearKind::Logistic;
  zero.weights = {0.0, 0.0};
  CHECK(linear_predict(zero, vec({5.0, 5.0})).label == Label::Real);

  SparseVector wrong;
  wrong.dim = 7;
  CHECK_THROWS_AS(linear_predict(model, wrong), DomainError);
}

TEST_CASE("label depends only on the sign of the score") {
  Rng rng(88);
  LinearModel model;
  model.kind = LinearKind::Svm;
  model.weights = {0.7, -1.3, 0.2};
  model.bias = -0.1;
  LinearModel scaled = model;
  for (double& w : scaled.weights) w *= 2.0;
  scaled.bias *= 2.0;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> row(3);
    for (double& v : row) v = rng.normal(0.0, 1.0);
    const SparseVector x = to_sparse(row);
    CHECK(linear_predict(model, x).label == linear_predict(scaled, x).label);
  }
}
