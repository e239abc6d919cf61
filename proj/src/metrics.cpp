#include "veritext/metrics.hpp"

namespace veritext {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1(double precision, double recall) {
  return ratio(2.0 * precision * recall, precision + recall);
}

}  // namespace

ConfusionMatrix confusion(const std::vector<Label>& pred,
                          const std::vector<Label>& gold) {
  if (pred.size() != gold.size())
    throw DomainError("confusion: prediction/gold length mismatch");
  if (pred.empty()) throw DomainError("confusion: empty inputs");
  ConfusionMatrix cm;
  for (size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == Label::Fake;
    const bool g = gold[i] == Label::Fake;
    if (p && g) ++cm.tp;
    else if (p && !g) ++cm.fp;
    else if (!p && g) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.cm = cm;
  const double total = static_cast<double>(cm.total());
  r.accuracy = ratio(static_cast<double>(cm.tp + cm.tn), total);
  r.precision = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fp));
  r.recall = ratio(static_cast<double>(cm.tp), static_cast<double>(cm.tp + cm.fn));
  r.f1_positive = f1(r.precision, r.recall);

  // per-class F1 for REAL (swap the roles)
  const double precision_real =
      ratio(static_cast<double>(cm.tn), static_cast<double>(cm.tn + cm.fn));
  const double recall_real =
      ratio(static_cast<double>(cm.tn), static_cast<double>(cm.tn + cm.fp));
  const double f1_real = f1(precision_real, recall_real);

  const double support_fake = static_cast<double>(cm.tp + cm.fn);
  const double support_real = static_cast<double>(cm.fp + cm.tn);
  r.f1_weighted =
      ratio(support_fake * r.f1_positive + support_real * f1_real, total);
  return r;
}

}  // namespace veritext
