#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "veritext/corpus.hpp"
#include "veritext/features.hpp"
#include "veritext/linear.hpp"  // TrainLog

namespace veritext {

/// Flat tree node; feature < 0 marks a leaf. Leaf value is a positive-class
/// probability for CART/forest trees and an additive log-odds contribution
/// for boosted trees. Routing: x[feature] <= threshold goes left.
struct TreeNode {
  int32_t feature = -1;
  double threshold = 0.0;
  int32_t left = -1;
  int32_t right = -1;
  double value = 0.0;
};

using Tree = std::vector<TreeNode>;  // root at index 0

/// Leaf value reached by x (absent sparse entries route as 0.0).
double tree_value(const Tree& tree, const SparseVector& x);

struct TreeParams {
  int max_depth = -1;          // -1 = unbounded
  int64_t min_leaf = 1;
  int64_t feature_subset = -1; // candidates per node; -1 = all features
  uint64_t seed = 0;
};

/// Greedy CART minimizing weighted Gini impurity. Candidate thresholds are
/// midpoints between consecutive distinct observed values; absent sparse
/// entries participate as 0.0. Stops at max_depth, purity, or fewer than
/// 2*min_leaf samples. Zero-gain splits are accepted (a depth-2 tree must be
/// able to resolve XOR).
Tree tree_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y,
              const TreeParams& params);

struct ForestParams {
  int n_trees = 100;
  int max_depth = -1;
  int64_t min_leaf = 1;
  int64_t feature_subset = -1;  // -1 = ceil(sqrt(D))
  bool bootstrap = true;
  uint64_t seed = 0;
};

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<uint64_t> tree_seeds;  // derived from the master seed
  int64_t feature_subset = 0;
  int64_t dim = 0;
};

ForestModel forest_fit(const std::vector<SparseVector>& x,
                       const std::vector<Label>& y, const ForestParams& params);

struct BoostParams {
  int rounds = 100;
  double eta = 0.1;
  int max_depth = 3;
  double lambda_reg = 1.0;
  uint64_t seed = 0;
};

struct BoostedModel {
  double base_score = 0.0;  // prior log-odds log(pos/neg)
  std::vector<Tree> trees;
  double eta = 0.1;
  double lambda_reg = 1.0;
  int64_t dim = 0;
};

/// Newton boosting on logistic loss (g = p - y, h = p(1-p)); split gain
/// 0.5 * [GL^2/(HL+reg) + GR^2/(HR+reg) - G^2/(H+reg)], leaf weight
/// -G/(H+reg). The TrainLog records mean logistic loss after every round.
std::pair<BoostedModel, TrainLog> boost_fit(const std::vector<SparseVector>& x,
                                            const std::vector<Label>& y,
                                            const BoostParams& params);

struct EnsemblePrediction {
  Label label = Label::Real;
  double score = 0.0;  // forest: mean leaf probability; boosted: sigmoid(margin)
};

EnsemblePrediction ensemble_predict(const ForestModel& model,
                                    const SparseVector& x);
EnsemblePrediction ensemble_predict(const BoostedModel& model,
                                    const SparseVector& x);

}  // namespace veritext
