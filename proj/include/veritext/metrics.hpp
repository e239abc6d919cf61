#pragma once

#include <cstdint>
#include <vector>

#include "veritext/corpus.hpp"

namespace veritext {

/// Confusion counts with FAKE as the positive class.
struct ConfusionMatrix {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
  int64_t tn = 0;

  int64_t total() const { return tp + fp + fn + tn; }
};

/// Throws DomainError on length mismatch or empty inputs.
ConfusionMatrix confusion(const std::vector<Label>& pred,
                          const std::vector<Label>& gold);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;    // positive class (FAKE)
  double recall = 0.0;
  double f1_positive = 0.0;
  double f1_weighted = 0.0;  // support-weighted mean of per-class F1
  ConfusionMatrix cm;
};

/// 0/0 cells are defined as 0.
MetricsReport metrics(const ConfusionMatrix& cm);

}  // namespace veritext
