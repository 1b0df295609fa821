#pragma once

#include <map>
#include <vector>

#include "snnsc/graph.hpp"

namespace snnsc {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction over a fixed set of parameter groups.
class Adam {
 public:
  Adam(AdamConfig cfg, std::vector<ParamGroup*> groups);

  // Applies one update from the gradients currently stored in the parameters,
  // then clears them. Throws NumericError naming the layer on a non-finite
  // gradient.
  void step();
  int64_t steps() const { return t_; }

 private:
  struct Moments {
    Tensor m, v;
  };
  AdamConfig cfg_;
  std::vector<ParamGroup*> groups_;
  std::map<std::string, Moments> state_;
  int64_t t_ = 0;
};

}  // namespace snnsc
