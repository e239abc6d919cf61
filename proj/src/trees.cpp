#include "veritext/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "veritext/rng.hpp"

namespace veritext {

namespace {

double stable_sigmoid_local(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Column-major view of the sample matrix. Entries per column are sorted by
// row; stored values are nonzero by SparseVector invariant.
struct CscMatrix {
  int64_t rows = 0;
  int64_t cols = 0;
  std::vector<std::vector<std::pair<int32_t, double>>> col;

  static CscMatrix build(const std::vector<SparseVector>& x) {
    CscMatrix m;
    m.rows = static_cast<int64_t>(x.size());
    m.cols = x.empty() ? 0 : x[0].dim;
    m.col.resize(m.cols);
    for (size_t i = 0; i < x.size(); ++i) {
      for (size_t k = 0; k < x[i].idx.size(); ++k) {
        m.col[x[i].idx[k]].emplace_back(static_cast<int32_t>(i), x[i].val[k]);
      }
    }
    return m;
  }
};

// Shared per-fit scratch. The stamp array implements O(1) node-membership
// tests without clearing between nodes.
struct Workspace {
  std::vector<int32_t> stamp;       // stamp[row] == epoch  <=>  row in node
  std::vector<double> row_value;    // feature value cache for the split column
  std::vector<int32_t> value_stamp;
  int32_t epoch = 0;
  std::vector<int32_t> feature_stamp;
  int32_t feature_epoch = 0;

  explicit Workspace(int64_t rows, int64_t cols)
      : stamp(rows, -1), row_value(rows, 0.0), value_stamp(rows, -1),
        feature_stamp(cols, -1) {}
};

struct ValueBucket {
  double value;
  double weight;  // total sample weight at this value
  double stat;    // weighted positives (CART) or G (boosting)
  double stat2;   // unused (CART) or H (boosting)
};

// Gather the distinct observed values of `feature` within the node, with the
// implicit zero mass included. Chooses between scanning the column (sparse
// columns) and binary-searching per node sample (small nodes in dense
// columns). Returns buckets sorted by value.
void gather_buckets(const CscMatrix& m, const Workspace& ws, int32_t feature,
                    const std::vector<int32_t>& samples,
                    const std::vector<double>& weight,
                    const std::vector<double>& stat_a,
                    const std::vector<double>* stat_b, double node_weight,
                    double node_a, double node_b,
                    std::vector<ValueBucket>& buckets) {
  buckets.clear();
  const auto& column = m.col[feature];
  std::vector<std::pair<double, int32_t>> present;  // (value, row)

  if (column.size() <= samples.size() * 4) {
    for (const auto& [row, value] : column) {
      if (ws.stamp[row] == ws.epoch) present.emplace_back(value, row);
    }
  } else {
    for (int32_t row : samples) {
      auto it = std::lower_bound(
          column.begin(), column.end(), row,
          [](const std::pair<int32_t, double>& e, int32_t r) { return e.first < r; });
      if (it != column.end() && it->first == row)
        present.emplace_back(it->second, row);
    }
  }
  std::sort(present.begin(), present.end());

  double present_w = 0.0, present_a = 0.0, present_b = 0.0;
  for (const auto& [value, row] : present) {
    const double w = weight[row];
    const double a = stat_a[row];
    const double b = stat_b ? (*stat_b)[row] : 0.0;
    present_w += w;
    present_a += a;
    present_b += b;
    if (!buckets.empty() && buckets.back().value == value) {
      buckets.back().weight += w;
      buckets.back().stat += a;
      buckets.back().stat2 += b;
    } else {
      buckets.push_back({value, w, a, b});
    }
  }

  const double zero_w = node_weight - present_w;
  if (zero_w > 0.0) {
    ValueBucket zero{0.0, zero_w, node_a - present_a, node_b - present_b};
    auto it = std::lower_bound(
        buckets.begin(), buckets.end(), 0.0,
        [](const ValueBucket& bk, double v) { return bk.value < v; });
    buckets.insert(it, zero);
  }
}

double gini_sum(double pos, double n) {
  // n * (1 - p^2 - q^2), written to avoid the division when n is 0
  if (n <= 0.0) return 0.0;
  const double neg = n - pos;
  return n - (pos * pos + neg * neg) / n;
}

struct CartFitter {
  const CscMatrix& m;
  const std::vector<double>& y;       // 0/1 per row
  const std::vector<double>& weight;  // bootstrap weights per row
  TreeParams params;
  Rng rng;
  Workspace ws;
  Tree tree;
  std::vector<int32_t> candidate_features;

  CartFitter(const CscMatrix& m_, const std::vector<double>& y_,
             const std::vector<double>& w_, const TreeParams& p_)
      : m(m_), y(y_), weight(w_), params(p_),
        rng(mix_seed(p_.seed, 0xcaa7)), ws(m_.rows, m_.cols) {}

  void sample_features() {
    candidate_features.clear();
    const int64_t d = m.cols;
    int64_t want = params.feature_subset;
    if (want < 0 || want >= d) {
      candidate_features.resize(d);
      std::iota(candidate_features.begin(), candidate_features.end(), 0);
      return;
    }
    ++ws.feature_epoch;
    while (static_cast<int64_t>(candidate_features.size()) < want) {
      int32_t f = static_cast<int32_t>(rng.below(static_cast<uint64_t>(d)));
      if (ws.feature_stamp[f] == ws.feature_epoch) continue;
      ws.feature_stamp[f] = ws.feature_epoch;
      candidate_features.push_back(f);
    }
  }

  int32_t build(std::vector<int32_t>& samples, int depth) {
    double node_w = 0.0, node_pos = 0.0;
    for (int32_t row : samples) {
      node_w += weight[row];
      node_pos += weight[row] * y[row];
    }

    const int32_t id = static_cast<int32_t>(tree.size());
    tree.push_back(TreeNode{});
    tree[id].value = node_pos / node_w;

    const bool pure = node_pos <= 0.0 || node_pos >= node_w;
    const bool depth_stop = params.max_depth >= 0 && depth >= params.max_depth;
    if (pure || depth_stop || node_w < 2.0 * static_cast<double>(params.min_leaf))
      return id;

    ++ws.epoch;
    for (int32_t row : samples) ws.stamp[row] = ws.epoch;
    sample_features();

    const double parent_impurity = gini_sum(node_pos, node_w);
    double best_impurity = std::numeric_limits<double>::infinity();
    int32_t best_feature = -1;
    double best_threshold = 0.0;
    std::vector<ValueBucket> buckets;

    for (int32_t f : candidate_features) {
      gather_buckets(m, ws, f, samples, weight, y_weighted(), nullptr, node_w,
                     node_pos, 0.0, buckets);
      if (buckets.size() < 2) continue;
      double left_w = 0.0, left_pos = 0.0;
      for (size_t k = 0; k + 1 < buckets.size(); ++k) {
        left_w += buckets[k].weight;
        left_pos += buckets[k].stat;
        const double right_w = node_w - left_w;
        const double right_pos = node_pos - left_pos;
        if (left_w < static_cast<double>(params.min_leaf) ||
            right_w < static_cast<double>(params.min_leaf))
          continue;
        const double impurity =
            gini_sum(left_pos, left_w) + gini_sum(right_pos, right_w);
        if (impurity < best_impurity) {
          best_impurity = impurity;
          best_feature = f;
          best_threshold = 0.5 * (buckets[k].value + buckets[k + 1].value);
        }
      }
    }

    if (best_feature < 0) return id;
    // Any Gini split satisfies child impurity <= parent impurity; a violation
    // beyond rounding means the sweep is broken.
    if (best_impurity > parent_impurity + 1e-9 * (1.0 + node_w))
      throw std::logic_error("tree_fit: split increased weighted impurity");

    // Cache the chosen column's values for the node rows, then partition.
    ++ws.epoch;  // value_stamp shares the epoch counter
    const auto& column = m.col[best_feature];
    for (const auto& [row, value] : column) {
      ws.row_value[row] = value;
      ws.value_stamp[row] = ws.epoch;
    }
    std::vector<int32_t> left_rows, right_rows;
    for (int32_t row : samples) {
      const double value = ws.value_stamp[row] == ws.epoch ? ws.row_value[row] : 0.0;
      (value <= best_threshold ? left_rows : right_rows).push_back(row);
    }
    samples.clear();
    samples.shrink_to_fit();

    tree[id].feature = best_feature;
    tree[id].threshold = best_threshold;
    const int32_t left_id = build(left_rows, depth + 1);
    tree[id].left = left_id;
    const int32_t right_id = build(right_rows, depth + 1);
    tree[id].right = right_id;
    return id;
  }

  // weighted positives per row: weight[row] * y[row], materialized lazily
  const std::vector<double>& y_weighted() {
    if (wy_.empty()) {
      wy_.resize(y.size());
      for (size_t i = 0; i < y.size(); ++i) wy_[i] = weight[i] * y[i];
    }
    return wy_;
  }
  std::vector<double> wy_;
};

Tree fit_cart(const CscMatrix& m, const std::vector<double>& y01,
              const std::vector<double>& weight,
              const std::vector<int32_t>& samples, const TreeParams& params) {
  CartFitter fitter(m, y01, weight, params);
  std::vector<int32_t> s = samples;
  fitter.build(s, 0);
  return std::move(fitter.tree);
}

// Newton tree growing for boosting: same machinery, but buckets carry (G, H)
// and splits maximize the regularized gain.
struct NewtonFitter {
  const CscMatrix& m;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const std::vector<double>& unit_weight;
  int max_depth;
  double lambda_reg;
  Workspace ws;
  Tree tree;
  std::vector<int32_t> all_features;

  NewtonFitter(const CscMatrix& m_, const std::vector<double>& g_,
               const std::vector<double>& h_, const std::vector<double>& w_,
               int depth_, double reg_)
      : m(m_), grad(g_), hess(h_), unit_weight(w_), max_depth(depth_),
        lambda_reg(reg_), ws(m_.rows, m_.cols) {
    all_features.resize(m.cols);
    std::iota(all_features.begin(), all_features.end(), 0);
  }

  static double leaf_gain(double g, double h, double reg) {
    return g * g / (h + reg);
  }

  int32_t build(std::vector<int32_t>& samples, int depth) {
    double node_g = 0.0, node_h = 0.0, node_w = 0.0;
    for (int32_t row : samples) {
      node_g += grad[row];
      node_h += hess[row];
      node_w += 1.0;
    }

    const int32_t id = static_cast<int32_t>(tree.size());
    tree.push_back(TreeNode{});
    tree[id].value = -node_g / (node_h + lambda_reg);

    if (depth >= max_depth || samples.size() < 2) return id;

    ++ws.epoch;
    for (int32_t row : samples) ws.stamp[row] = ws.epoch;

    double best_gain = 1e-12;
    int32_t best_feature = -1;
    double best_threshold = 0.0;
    std::vector<ValueBucket> buckets;
    const double parent_term = leaf_gain(node_g, node_h, lambda_reg);

    for (int32_t f : all_features) {
      gather_buckets(m, ws, f, samples, unit_weight, grad, &hess, node_w,
                     node_g, node_h, buckets);
      if (buckets.size() < 2) continue;
      double left_g = 0.0, left_h = 0.0;
      for (size_t k = 0; k + 1 < buckets.size(); ++k) {
        left_g += buckets[k].stat;
        left_h += buckets[k].stat2;
        const double right_g = node_g - left_g;
        const double right_h = node_h - left_h;
        const double gain = 0.5 * (leaf_gain(left_g, left_h, lambda_reg) +
                                   leaf_gain(right_g, right_h, lambda_reg) -
                                   parent_term);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (buckets[k].value + buckets[k + 1].value);
        }
      }
    }
    if (best_feature < 0) return id;

    ++ws.epoch;
    const auto& column = m.col[best_feature];
    for (const auto& [row, value] : column) {
      ws.row_value[row] = value;
      ws.value_stamp[row] = ws.epoch;
    }
    std::vector<int32_t> left_rows, right_rows;
    for (int32_t row : samples) {
      const double value = ws.value_stamp[row] == ws.epoch ? ws.row_value[row] : 0.0;
      (value <= best_threshold ? left_rows : right_rows).push_back(row);
    }
    if (left_rows.empty() || right_rows.empty()) return id;
    samples.clear();
    samples.shrink_to_fit();

    tree[id].feature = best_feature;
    tree[id].threshold = best_threshold;
    tree[id].left = build(left_rows, depth + 1);
    tree[id].right = build(right_rows, depth + 1);
    return id;
  }
};

std::vector<double> labels01(const std::vector<Label>& y) {
  std::vector<double> out(y.size());
  for (size_t i = 0; i < y.size(); ++i) out[i] = y[i] == Label::Fake ? 1.0 : 0.0;
  return out;
}

void check_data(const std::vector<SparseVector>& x, const std::vector<Label>& y,
                const char* who) {
  if (x.empty() || x.size() != y.size())
    throw DomainError(std::string(who) + ": empty or mismatched training data");
  for (const SparseVector& xi : x) {
    if (xi.dim != x[0].dim)
      throw DomainError(std::string(who) + ": inconsistent feature dimensions");
  }
}

}  // namespace

double tree_value(const Tree& tree, const SparseVector& x) {
  int32_t node = 0;
  while (tree[node].feature >= 0) {
    const int32_t f = tree[node].feature;
    double value = 0.0;
    auto it = std::lower_bound(x.idx.begin(), x.idx.end(), f);
    if (it != x.idx.end() && *it == f) value = x.val[it - x.idx.begin()];
    node = value <= tree[node].threshold ? tree[node].left : tree[node].right;
  }
  return tree[node].value;
}

Tree tree_fit(const std::vector<SparseVector>& x, const std::vector<Label>& y,
              const TreeParams& params) {
  check_data(x, y, "tree_fit");
  CscMatrix m = CscMatrix::build(x);
  std::vector<double> weight(x.size(), 1.0);
  std::vector<int32_t> samples(x.size());
  std::iota(samples.begin(), samples.end(), 0);
  return fit_cart(m, labels01(y), weight, samples, params);
}

ForestModel forest_fit(const std::vector<SparseVector>& x,
                       const std::vector<Label>& y, const ForestParams& params) {
  check_data(x, y, "forest_fit");
  if (params.n_trees < 1) throw DomainError("forest_fit: n_trees must be >= 1");
  CscMatrix m = CscMatrix::build(x);
  const std::vector<double> y01 = labels01(y);
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t d = x[0].dim;

  ForestModel model;
  model.dim = d;
  model.feature_subset =
      params.feature_subset > 0
          ? params.feature_subset
          : static_cast<int64_t>(std::ceil(std::sqrt(static_cast<double>(d))));

  TreeParams tree_params;
  tree_params.max_depth = params.max_depth;
  tree_params.min_leaf = params.min_leaf;
  tree_params.feature_subset = model.feature_subset;

  for (int t = 0; t < params.n_trees; ++t) {
    const uint64_t tree_seed = mix_seed(params.seed, 0xf04e57 + static_cast<uint64_t>(t));
    model.tree_seeds.push_back(tree_seed);
    tree_params.seed = tree_seed;

    std::vector<double> weight(n, params.bootstrap ? 0.0 : 1.0);
    std::vector<int32_t> samples;
    if (params.bootstrap) {
      Rng boot(mix_seed(tree_seed, 0xb007));
      for (int64_t i = 0; i < n; ++i)
        weight[boot.below(static_cast<uint64_t>(n))] += 1.0;
      for (int64_t i = 0; i < n; ++i)
        if (weight[i] > 0.0) samples.push_back(static_cast<int32_t>(i));
    } else {
      samples.resize(n);
      std::iota(samples.begin(), samples.end(), 0);
    }
    model.trees.push_back(fit_cart(m, y01, weight, samples, tree_params));
  }
  return model;
}

std::pair<BoostedModel, TrainLog> boost_fit(const std::vector<SparseVector>& x,
                                            const std::vector<Label>& y,
                                            const BoostParams& params) {
  check_data(x, y, "boost_fit");
  bool fake = false, real = false;
  for (Label l : y) (l == Label::Fake ? fake : real) = true;
  if (!fake || !real) throw DomainError("boost_fit: both classes must be present");

  CscMatrix m = CscMatrix::build(x);
  const std::vector<double> y01 = labels01(y);
  const int64_t n = static_cast<int64_t>(x.size());

  BoostedModel model;
  model.dim = x[0].dim;
  model.eta = params.eta;
  model.lambda_reg = params.lambda_reg;
  double pos = 0.0;
  for (double v : y01) pos += v;
  model.base_score = std::log(pos / (static_cast<double>(n) - pos));

  std::vector<double> margin(n, model.base_score);
  std::vector<double> grad(n), hess(n);
  std::vector<double> unit_weight(n, 1.0);
  std::vector<int32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  TrainLog log;
  for (int round = 0; round < params.rounds; ++round) {
    for (int64_t i = 0; i < n; ++i) {
      const double p = stable_sigmoid_local(margin[i]);
      grad[i] = p - y01[i];
      hess[i] = p * (1.0 - p);
    }
    NewtonFitter fitter(m, grad, hess, unit_weight, params.max_depth,
                        params.lambda_reg);
    std::vector<int32_t> rows = all_rows;
    fitter.build(rows, 0);
    Tree tree = std::move(fitter.tree);

    for (int64_t i = 0; i < n; ++i) {
      // route row i down the new tree using the CSC columns
      int32_t node = 0;
      while (tree[node].feature >= 0) {
        const auto& column = m.col[tree[node].feature];
        double value = 0.0;
        auto it = std::lower_bound(
            column.begin(), column.end(), static_cast<int32_t>(i),
            [](const std::pair<int32_t, double>& e, int32_t r) { return e.first < r; });
        if (it != column.end() && it->first == static_cast<int32_t>(i))
          value = it->second;
        node = value <= tree[node].threshold ? tree[node].left : tree[node].right;
      }
      margin[i] += params.eta * tree[node].value;
    }
    model.trees.push_back(std::move(tree));

    double loss = 0.0;
    for (int64_t i = 0; i < n; ++i)
      loss += softplus(margin[i]) - y01[i] * margin[i];
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss))
      throw TrainError("boost_fit: non-finite loss at round " +
                       std::to_string(round));
    log.objective.push_back(loss);
  }
  return {std::move(model), std::move(log)};
}

EnsemblePrediction ensemble_predict(const ForestModel& model,
                                    const SparseVector& x) {
  if (x.dim != model.dim)
    throw DomainError("ensemble_predict: feature dimension mismatch");
  double sum = 0.0;
  for (const Tree& tree : model.trees) sum += tree_value(tree, x);
  EnsemblePrediction pred;
  pred.score = sum / static_cast<double>(model.trees.size());
  pred.label = pred.score > 0.5 ? Label::Fake : Label::Real;
  return pred;
}

EnsemblePrediction ensemble_predict(const BoostedModel& model,
                                    const SparseVector& x) {
  if (x.dim != model.dim)
    throw DomainError("ensemble_predict: feature dimension mismatch");
  double margin = model.base_score;
  for (const Tree& tree : model.trees) margin += model.eta * tree_value(tree, x);
  EnsemblePrediction pred;
  pred.score = stable_sigmoid_local(margin);
  pred.label = margin > 0.0 ? Label::Fake : Label::Real;
  return pred;
}

}  // namespace veritext
