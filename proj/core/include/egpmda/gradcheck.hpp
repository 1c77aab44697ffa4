#pragma once
// Central finite-difference gradient checker. The relative error of an
// analytic/numeric gradient pair is |a - f| / max(|a|, |f|, floor): below
// the floor the comparison degrades to an absolute one, which keeps
// finite-difference noise on near-zero gradients from dominating the ratio.

#include <functional>
#include <string>
#include <vector>

#include "egpmda/tensor.hpp"

namespace egpmda {

struct GradCheckOptions {
  double epsilon = 1e-5;
  double rel_floor = 1e-3;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  size_t worst_param = 0;
  int64_t worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int64_t checked = 0;
};

inline double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// `loss_fn` re-evaluates the loss from the current contents of `params`.
// `analytic` holds one gradient tensor per parameter, shape-aligned.
GradCheckResult check_gradients(const std::function<double()>& loss_fn, std::vector<Tensor*> params,
                                const std::vector<Tensor>& analytic, GradCheckOptions opts = {});

}  // namespace egpmda
