#include "veritext/linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "veritext/rng.hpp"

namespace veritext {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double y01(Label label) { return label == Label::Fake ? 1.0 : 0.0; }
double ypm(Label label) { return label == Label::Fake ? 1.0 : -1.0; }

void check_two_classes(const std::vector<Label>& y, const char* who) {
  bool fake = false, real = false;
  for (Label l : y) {
    (l == Label::Fake ? fake : real) = true;
  }
  if (!fake || !real)
    throw DomainError(std::string(who) + ": both classes must be present");
}

void check_dim(int64_t model_dim, const SparseVector& x, const char* who) {
  if (x.dim != model_dim)
    throw DomainError(std::string(who) + ": feature dimension " +
                      std::to_string(x.dim) + " does not match model dimension " +
                      std::to_string(model_dim));
}

}  // namespace

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

NaiveBayesModel nb_fit(const std::vector<SparseVector>& counts,
                       const std::vector<Label>& y, double alpha) {
  if (counts.empty() || counts.size() != y.size())
    throw DomainError("nb_fit: empty or mismatched training data");
  if (!(alpha > 0.0)) throw DomainError("nb_fit: alpha must be > 0");
  check_two_classes(y, "nb_fit");

  NaiveBayesModel model;
  model.alpha = alpha;
  model.vocab_size = counts[0].dim;
  const int64_t v = model.vocab_size;

  double class_docs[2] = {0.0, 0.0};
  std::vector<double> term_count(2 * v, 0.0);
  double class_total[2] = {0.0, 0.0};
  for (size_t i = 0; i < counts.size(); ++i) {
    check_dim(v, counts[i], "nb_fit");
    const size_t c = static_cast<size_t>(y[i]);
    class_docs[c] += 1.0;
    for (size_t k = 0; k < counts[i].idx.size(); ++k) {
      term_count[c * v + counts[i].idx[k]] += counts[i].val[k];
      class_total[c] += counts[i].val[k];
    }
  }
  const double n = static_cast<double>(counts.size());
  model.log_likelihood.resize(2 * v);
  for (size_t c = 0; c < 2; ++c) {
    model.log_prior[c] = std::log(class_docs[c] / n);
    const double denom = class_total[c] + alpha * static_cast<double>(v);
    for (int64_t t = 0; t < v; ++t) {
      model.log_likelihood[c * v + t] =
          std::log((term_count[c * v + t] + alpha) / denom);
    }
  }
  return model;
}

NbPrediction nb_predict(const NaiveBayesModel& model, const SparseVector& x) {
  check_dim(model.vocab_size, x, "nb_predict");
  double score[2];
  for (size_t c = 0; c < 2; ++c) {
    double s = model.log_prior[c];
    const double* row = model.log_likelihood.data() + c * model.vocab_size;
    for (size_t k = 0; k < x.idx.size(); ++k) s += x.val[k] * row[x.idx[k]];
    score[c] = s;
  }
  NbPrediction pred;
  // softmax over the two log scores
  const double m = std::max(score[0], score[1]);
  const double e0 = std::exp(score[0] - m);
  const double e1 = std::exp(score[1] - m);
  pred.posterior[0] = e0 / (e0 + e1);
  pred.posterior[1] = e1 / (e0 + e1);
  pred.label = score[0] > score[1] ? Label::Fake : Label::Real;
  return pred;
}

double logreg_objective(const std::vector<double>& w, double b,
                        const std::vector<SparseVector>& x,
                        const std::vector<Label>& y, double lambda) {
  double loss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double z = dot(x[i], w) + b;
    // cross-entropy = softplus(z) - y*z
    loss += softplus(z) - y01(y[i]) * z;
  }
  loss /= static_cast<double>(x.size());
  double reg = 0.0;
  for (double wi : w) reg += wi * wi;
  return loss + 0.5 * lambda * reg;
}

void logreg_gradient(const std::vector<double>& w, double b,
                     const std::vector<SparseVector>& x,
                     const std::vector<Label>& y, double lambda,
                     std::vector<double>& grad_w, double& grad_b) {
  grad_w.assign(w.size(), 0.0);
  grad_b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = (stable_sigmoid(dot(x[i], w) + b) - y01(y[i])) * inv_n;
    for (size_t k = 0; k < x[i].idx.size(); ++k)
      grad_w[x[i].idx[k]] += r * x[i].val[k];
    grad_b += r;
  }
  for (size_t j = 0; j < w.size(); ++j) grad_w[j] += lambda * w[j];
}

std::pair<LinearModel, TrainLog> logreg_fit(const std::vector<SparseVector>& x,
                                            const std::vector<Label>& y,
                                            const LogregParams& params) {
  if (x.empty() || x.size() != y.size())
    throw DomainError("logreg_fit: empty or mismatched training data");
  check_two_classes(y, "logreg_fit");
  const int64_t d = x[0].dim;
  for (const SparseVector& xi : x) check_dim(d, xi, "logreg_fit");

  LinearModel model;
  model.kind = LinearKind::Logistic;
  model.lambda = params.lambda;
  model.weights.assign(d, 0.0);
  TrainLog log;

  std::vector<double> grad_w;
  double grad_b = 0.0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    logreg_gradient(model.weights, model.bias, x, y, params.lambda, grad_w,
                    grad_b);
    for (int64_t j = 0; j < d; ++j) model.weights[j] -= params.lr * grad_w[j];
    model.bias -= params.lr * grad_b;
    const double obj =
        logreg_objective(model.weights, model.bias, x, y, params.lambda);
    if (!std::isfinite(obj))
      throw TrainError("logreg_fit: non-finite objective at epoch " +
                       std::to_string(epoch));
    log.objective.push_back(obj);
  }
  return {std::move(model), std::move(log)};
}

std::pair<LinearModel, TrainLog> svm_fit(const std::vector<SparseVector>& x,
                                         const std::vector<Label>& y,
                                         const SvmParams& params) {
  if (x.empty() || x.size() != y.size())
    throw DomainError("svm_fit: empty or mismatched training data");
  check_two_classes(y, "svm_fit");
  const int64_t d = x[0].dim;
  for (const SparseVector& xi : x) check_dim(d, xi, "svm_fit");

  // w is kept as scale * v so the 1/(lambda*t) shrink step is O(1); at t=1
  // the shrink factor is exactly zero, which resets the pair to (1, 0).
  std::vector<double> v(d, 0.0);
  double scale = 1.0;
  double bias = 0.0;
  TrainLog log;

  Rng rng(mix_seed(params.seed, 0x5f3759df));
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), size_t{0});

  int64_t t = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t i : order) {
      ++t;
      const double eta = 1.0 / (params.lambda * static_cast<double>(t));
      const double yi = ypm(y[i]);
      const double margin = yi * (scale * dot(x[i], v) + bias);
      const double shrink = 1.0 - 1.0 / static_cast<double>(t);
      if (shrink == 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
      } else {
        scale *= shrink;
        if (scale < 1e-9) {  // renormalize to keep v well-conditioned
          for (double& vj : v) vj *= scale;
          scale = 1.0;
        }
      }
      if (margin < 1.0) {
        const double step = eta * yi / scale;
        for (size_t k = 0; k < x[i].idx.size(); ++k)
          v[x[i].idx[k]] += step * x[i].val[k];
        bias += eta * yi;
      }
    }
    // epoch-end primal objective
    double norm2 = 0.0;
    for (double vj : v) norm2 += vj * vj;
    norm2 *= scale * scale;
    double hinge = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double m = ypm(y[i]) * (scale * dot(x[i], v) + bias);
      hinge += std::max(0.0, 1.0 - m);
    }
    const double obj =
        0.5 * params.lambda * norm2 + hinge / static_cast<double>(x.size());
    if (!std::isfinite(obj))
      throw TrainError("svm_fit: non-finite objective at epoch " +
                       std::to_string(epoch));
    log.objective.push_back(obj);
  }

  LinearModel model;
  model.kind = LinearKind::Svm;
  model.lambda = params.lambda;
  model.bias = bias;
  model.weights.resize(d);
  for (int64_t j = 0; j < d; ++j) model.weights[j] = scale * v[j];
  return {std::move(model), std::move(log)};
}

LinearPrediction linear_predict(const LinearModel& model, const SparseVector& x) {
  check_dim(static_cast<int64_t>(model.weights.size()), x, "linear_predict");
  LinearPrediction pred;
  pred.score = dot(x, model.weights) + model.bias;
  pred.probability = model.kind == LinearKind::Logistic
                         ? stable_sigmoid(pred.score)
                         : std::numeric_limits<double>::quiet_NaN();
  pred.label = pred.score > 0.0 ? Label::Fake : Label::Real;
  return pred;
}

}  // namespace veritext
