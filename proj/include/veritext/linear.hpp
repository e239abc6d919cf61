#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "veritext/corpus.hpp"
#include "veritext/features.hpp"

namespace veritext {

struct TrainLog {
  std::vector<double> objective;  // one entry per completed epoch/round

  size_t epochs() const { return objective.size(); }
  double final_objective() const {
    return objective.empty() ? 0.0 : objective.back();
  }
};

// ---------------------------------------------------------------------------
// Multinomial Naive Bayes over raw term counts.
// ---------------------------------------------------------------------------

struct NaiveBayesModel {
  double log_prior[2] = {0.0, 0.0};    // [fake, real]
  std::vector<double> log_likelihood;  // 2 x V row-major, rows [fake, real]
  int64_t vocab_size = 0;
  double alpha = 1.0;

  const double* class_row(Label c) const {
    return log_likelihood.data() + static_cast<size_t>(c) * vocab_size;
  }
};

/// Laplace-smoothed fit: theta[t,c] = (count(t,c) + alpha) / (count(.,c) + alpha*V).
/// X must be nonnegative count vectors. Throws DomainError if a class is
/// absent or alpha <= 0.
NaiveBayesModel nb_fit(const std::vector<SparseVector>& counts,
                       const std::vector<Label>& y, double alpha = 1.0);

struct NbPrediction {
  Label label = Label::Real;
  double posterior[2] = {0.0, 0.0};  // [fake, real], sums to 1
};

/// argmax of log prior + sum of count-weighted log likelihoods; posterior is
/// the softmax of the two log scores; ties go to REAL.
NbPrediction nb_predict(const NaiveBayesModel& model, const SparseVector& x);

// ---------------------------------------------------------------------------
// Linear classifiers: logistic regression and primal (Pegasos) linear SVM.
// ---------------------------------------------------------------------------

enum class LinearKind : uint8_t { Logistic = 0, Svm = 1 };

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  LinearKind kind = LinearKind::Logistic;
  double lambda = 0.0;
};

struct LogregParams {
  double lambda = 1e-4;
  double lr = 0.1;
  int epochs = 100;
  uint64_t seed = 0;
};

struct SvmParams {
  double lambda = 1e-4;
  int epochs = 20;
  uint64_t seed = 0;
};

/// Full-batch gradient descent on mean cross-entropy + (lambda/2)||w||^2
/// (bias unregularized). FAKE maps to y=1. Throws TrainError (with the epoch
/// index) if the objective goes non-finite.
std::pair<LinearModel, TrainLog> logreg_fit(const std::vector<SparseVector>& x,
                                            const std::vector<Label>& y,
                                            const LogregParams& params);

/// Pegasos subgradient descent on (lambda/2)||w||^2 + mean hinge loss with
/// step 1/(lambda*t); FAKE maps to +1, REAL to -1. The bias takes the same
/// subgradient step but is excluded from the regularizer.
std::pair<LinearModel, TrainLog> svm_fit(const std::vector<SparseVector>& x,
                                         const std::vector<Label>& y,
                                         const SvmParams& params);

struct LinearPrediction {
  Label label = Label::Real;
  double score = 0.0;        // w.x + b
  double probability = 0.0;  // sigmoid(score); meaningful for Logistic only
};

/// label = FAKE iff score > 0; REAL on ties. Throws DomainError on a
/// dimension mismatch.
LinearPrediction linear_predict(const LinearModel& model, const SparseVector& x);

// Exposed for the finite-difference oracle (cmd gradcheck and tests).
double logreg_objective(const std::vector<double>& w, double b,
                        const std::vector<SparseVector>& x,
                        const std::vector<Label>& y, double lambda);
void logreg_gradient(const std::vector<double>& w, double b,
                     const std::vector<SparseVector>& x,
                     const std::vector<Label>& y, double lambda,
                     std::vector<double>& grad_w, double& grad_b);

double stable_sigmoid(double x);

}  // namespace veritext
