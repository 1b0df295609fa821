#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "snnsc/graph.hpp"

namespace snnsc {

struct FiniteDiffFailure {
  std::string param_id;
  int64_t index;
  double analytic;
  double numeric;
  double rel_err;
};

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  int64_t checked = 0;
  std::vector<FiniteDiffFailure> failures;  // entries above tolerance
  bool pass() const { return failures.empty(); }
};

// Central-difference check of the analytic gradients left in `params` by
// `grad_fn` against `loss_fn` evaluated under perturbed parameters.
//
// Both callbacks must evaluate the same loss. For graphs containing fire,
// quantize or channel ops, build them in smooth-gradient mode so the
// numerical derivative probes the registered surrogate rather than the
// (zero almost everywhere) hard step.
//
// Relative error per entry is |a-n| / max(|a|, |n|, 1e-4); the floor keeps
// near-zero gradients from amplifying finite-difference noise.
FiniteDiffReport finite_diff_check(const std::function<double()>& loss_fn,
                                   const std::function<void()>& grad_fn,
                                   const std::vector<std::pair<std::string, Parameter*>>& params,
                                   double h, double tolerance);

}  // namespace snnsc
