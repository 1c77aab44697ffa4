#include "egpmda/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace egpmda {

GradCheckResult check_gradients(const std::function<double()>& loss_fn, std::vector<Tensor*> params,
                                const std::vector<Tensor>& analytic, GradCheckOptions opts) {
  if (params.size() != analytic.size())
    throw std::invalid_argument("check_gradients: parameter/gradient count mismatch");
  GradCheckResult result;
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& t = *params[p];
    if (!t.same_shape(analytic[p]))
      throw std::invalid_argument("check_gradients: gradient shape mismatch at parameter " + std::to_string(p));
    for (int64_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + opts.epsilon;
      const double up = loss_fn();
      t[i] = saved - opts.epsilon;
      const double down = loss_fn();
      t[i] = saved;
      const double numeric = (up - down) / (2.0 * opts.epsilon);
      const double rel = relative_error(analytic[p][i], numeric, opts.rel_floor);
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = p;
        result.worst_index = i;
        result.worst_analytic = analytic[p][i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace egpmda
