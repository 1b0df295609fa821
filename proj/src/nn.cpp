#include "snnsc/nn.hpp"

#include <cmath>

namespace snnsc {

Tensor kaiming_uniform(const Shape& shape, int fan_in, Rng& rng) {
  Tensor t = Tensor::zeros(shape);
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& x : t.v) x = rng.uniform(-bound, bound);
  return t;
}

namespace {

Parameter& bind_or_init(ParamGroup& g, const std::string& id, const Shape& shape, int fan_in,
                        Rng* init) {
  if (g.has(id)) {
    Parameter& p = g.at(id);
    if (p.value.shape != shape) {
      throw ShapeError("layer " + id + ": checkpoint shape " + shape_str(p.value.shape) +
                       " vs configured " + shape_str(shape));
    }
    return p;
  }
  if (init == nullptr) throw ConfigError("layer " + id + ": missing from checkpoint");
  if (fan_in > 0) return g.create(id, kaiming_uniform(shape, fan_in, *init));
  return g.create(id, Tensor::zeros(shape));
}

}  // namespace

Conv2d Conv2d::attach(ParamGroup& g, const std::string& id, int in_ch, int out_ch, int ksize,
                      int stride, int pad, Rng* init) {
  Conv2d c;
  c.stride = stride;
  c.pad = pad;
  c.w = &bind_or_init(g, id + ".w", {out_ch, in_ch, ksize, ksize}, in_ch * ksize * ksize, init);
  c.b = &bind_or_init(g, id + ".b", {out_ch}, 0, init);
  return c;
}

Linear Linear::attach(ParamGroup& g, const std::string& id, int in_dim, int out_dim, Rng* init) {
  Linear l;
  l.w = &bind_or_init(g, id + ".w", {out_dim, in_dim}, in_dim, init);
  l.b = &bind_or_init(g, id + ".b", {out_dim}, 0, init);
  return l;
}

}  // namespace snnsc
