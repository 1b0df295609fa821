#include "snnsc/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace snnsc {

FiniteDiffReport finite_diff_check(const std::function<double()>& loss_fn,
                                   const std::function<void()>& grad_fn,
                                   const std::vector<std::pair<std::string, Parameter*>>& params,
                                   double h, double tolerance) {
  int64_t total = 0;
  for (const auto& [id, p] : params) total += p->value.size();
  if (total > 10000) {
    throw ConfigError("finite_diff_check: " + std::to_string(total) +
                      " parameter entries exceed the 10^4 cost guard");
  }

  for (const auto& [id, p] : params) p->zero_grad();
  grad_fn();

  FiniteDiffReport report;
  for (const auto& [id, p] : params) {
    for (int64_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value.v[i];
      p->value.v[i] = saved + h;
      const double up = loss_fn();
      p->value.v[i] = saved - h;
      const double down = loss_fn();
      p->value.v[i] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad.v[i];
      const double denom = std::max({std::fabs(numeric), std::fabs(analytic), 1e-4});
      const double rel = std::fabs(numeric - analytic) / denom;
      report.max_rel_err = std::max(report.max_rel_err, rel);
      ++report.checked;
      if (rel > tolerance) report.failures.push_back({id, i, analytic, numeric, rel});
    }
  }
  return report;
}

}  // namespace snnsc
