#pragma once

#include "snnsc/graph.hpp"
#include "snnsc/kernels.hpp"
#include "snnsc/rng.hpp"

namespace snnsc {

// Kaiming-uniform weight, zero bias. Binds to existing parameters in the
// group (checkpoint load) or creates freshly initialized ones.
struct Conv2d {
  Parameter* w = nullptr;
  Parameter* b = nullptr;
  int stride = 1;
  int pad = 0;

  static Conv2d attach(ParamGroup& g, const std::string& id, int in_ch, int out_ch, int ksize,
                       int stride, int pad, Rng* init);

  Tensor forward(const Tensor& x) const { return kernels::conv2d_forward(x, w->value, b->value, stride, pad); }
  int forward(Graph& g, int x, bool trainable) const {
    const int wn = trainable ? g.param(*w) : g.frozen(*w);
    const int bn = trainable ? g.param(*b) : g.frozen(*b);
    return g.conv2d(x, wn, bn, stride, pad);
  }
};

struct Linear {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  static Linear attach(ParamGroup& g, const std::string& id, int in_dim, int out_dim, Rng* init);

  Tensor forward(const Tensor& x) const { return kernels::linear_forward(x, w->value, b->value); }
  int forward(Graph& g, int x, bool trainable) const {
    const int wn = trainable ? g.param(*w) : g.frozen(*w);
    const int bn = trainable ? g.param(*b) : g.frozen(*b);
    return g.linear(x, wn, bn);
  }
};

Tensor kaiming_uniform(const Shape& shape, int fan_in, Rng& rng);

}  // namespace snnsc
