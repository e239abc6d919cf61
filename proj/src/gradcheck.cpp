#include "veritext/gradcheck.hpp"

#include <cmath>

#include "veritext/encoder.hpp"
#include "veritext/linear.hpp"
#include "veritext/rng.hpp"

namespace veritext {

namespace {

// Relative error with an absolute floor: entries far below the floor are
// effectively compared absolutely, which keeps finite-difference roundoff on
// near-zero gradients from being amplified into spurious failures.
double rel_error(double analytic, double numeric, double floor_value) {
  const double scale =
      std::max({std::fabs(analytic), std::fabs(numeric), floor_value});
  return std::fabs(analytic - numeric) / scale;
}

GradcheckResult check_logreg(bool corrupt) {
  // fixed random 5x4 problem with a nonzero evaluation point
  Rng rng(20240117);
  const int64_t n = 5, d = 4;
  std::vector<SparseVector> x(n);
  std::vector<Label> y;
  for (int64_t i = 0; i < n; ++i) {
    x[i].dim = d;
    for (int64_t j = 0; j < d; ++j) {
      x[i].idx.push_back(static_cast<int32_t>(j));
      x[i].val.push_back(rng.normal(0.0, 1.0));
    }
    y.push_back(i % 2 == 0 ? Label::Fake : Label::Real);
  }
  std::vector<double> w(d);
  for (double& wj : w) wj = rng.normal(0.0, 0.8);
  double b = rng.normal(0.0, 0.5);
  const double lambda = 1e-4;

  std::vector<double> grad_w;
  double grad_b = 0.0;
  logreg_gradient(w, b, x, y, lambda, grad_w, grad_b);
  if (corrupt) grad_w[0] += 1e-3;

  const double h = 1e-6;
  GradcheckResult result{"logreg", 0.0, 1e-6, false};
  for (int64_t j = 0; j <= d; ++j) {
    double saved = j < d ? w[j] : b;
    auto set = [&](double v) {
      if (j < d) w[j] = v; else b = v;
    };
    set(saved + h);
    const double up = logreg_objective(w, b, x, y, lambda);
    set(saved - h);
    const double down = logreg_objective(w, b, x, y, lambda);
    set(saved);
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = j < d ? grad_w[j] : grad_b;
    result.max_rel_error =
        std::max(result.max_rel_error, rel_error(analytic, numeric, 1e-3));
  }
  result.pass = result.max_rel_error < result.threshold;
  return result;
}

std::vector<GradcheckResult> check_encoder(bool corrupt) {
  // 2-example, length-6 batch over a small config; the second sequence is
  // shorter so padding takes part in the check.
  EncoderConfig cfg;
  cfg.vocab_size = 13;
  cfg.d_model = 8;
  cfg.heads = 2;
  cfg.layers = 2;
  cfg.d_ff = 16;
  cfg.max_len = 8;
  cfg.seed = 7;
  EncoderModel model = encoder_init(cfg);
  // healthier gradients than the 0.02 training init
  Rng rng(99321);
  for (const ParamBlock& block : param_blocks(model)) {
    const bool is_gain = block.name.find("gain") != std::string::npos;
    for (double& p : *block.data)
      p = is_gain ? 1.0 + rng.normal(0.0, 0.2) : rng.normal(0.0, 0.4);
  }

  Batch batch;
  batch.size = 2;
  batch.len = 6;
  batch.tokens = {2, 5, 3, 7, 4, 6, 8, 9, 2, 1, 0, 0};
  batch.pad = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
  batch.labels = {Label::Fake, Label::Real};

  EncoderModel grads = zeros_like(model);
  encoder_loss_and_grads(model, batch, grads);
  if (corrupt) grads.layers[0].wq[3] += 1e-2;

  const double h = 1e-4;
  std::vector<GradcheckResult> results;
  std::vector<ParamBlock> params = param_blocks(model);
  std::vector<ParamBlock> grad_blocks = param_blocks(grads);
  for (size_t blk = 0; blk < params.size(); ++blk) {
    GradcheckResult result{"encoder." + params[blk].name, 0.0, 1e-4, false};
    std::vector<double>& values = *params[blk].data;
    const std::vector<double>& analytic = *grad_blocks[blk].data;
    for (size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + h;
      const double up = encoder_loss(model, batch);
      values[j] = saved - h;
      const double down = encoder_loss(model, batch);
      values[j] = saved;
      const double numeric = (up - down) / (2.0 * h);
      result.max_rel_error =
          std::max(result.max_rel_error, rel_error(analytic[j], numeric, 1e-3));
    }
    result.pass = result.max_rel_error < result.threshold;
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace

std::vector<GradcheckResult> run_gradcheck(bool corrupt) {
  std::vector<GradcheckResult> results;
  results.push_back(check_logreg(corrupt));
  std::vector<GradcheckResult> encoder_results = check_encoder(corrupt);
  results.insert(results.end(), encoder_results.begin(), encoder_results.end());
  return results;
}

bool gradcheck_passed(const std::vector<GradcheckResult>& results) {
  for (const GradcheckResult& r : results) {
    if (!r.pass) return false;
  }
  return true;
}

}  // namespace veritext
