#pragma once

#include <string>
#include <vector>

namespace veritext {

struct GradcheckResult {
  std::string block;
  double max_rel_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Central-difference oracles over built-in fixtures: the logistic-regression
/// gradient (h = 1e-6, threshold 1e-6) and every encoder parameter block
/// (h = 1e-4, threshold 1e-4). `corrupt` perturbs one analytic gradient entry
/// as a negative control.
std::vector<GradcheckResult> run_gradcheck(bool corrupt = false);

bool gradcheck_passed(const std::vector<GradcheckResult>& results);

}  // namespace veritext
