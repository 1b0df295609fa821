#include "snnsc/adam.hpp"

#include <cmath>
#include <string>

namespace snnsc {

Adam::Adam(AdamConfig cfg, std::vector<ParamGroup*> groups)
    : cfg_(cfg), groups_(std::move(groups)) {
  for (ParamGroup* g : groups_) {
    for (auto& [id, p] : g->params) {
      Moments mo;
      mo.m = Tensor::zeros(p.value.shape);
      mo.v = Tensor::zeros(p.value.shape);
      state_.emplace(std::string(role_tag(g->role)) + "/" + id, std::move(mo));
    }
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (ParamGroup* g : groups_) {
    for (auto& [id, p] : g->params) {
      p.ensure_grad();
      Moments& mo = state_.at(std::string(role_tag(g->role)) + "/" + id);
      for (int64_t i = 0; i < p.value.size(); ++i) {
        const double gr = p.grad.v[i];
        if (!std::isfinite(gr)) {
          throw NumericError(std::string("adam: non-finite gradient in layer ") + role_tag(g->role) +
                             "/" + id);
        }
        mo.m.v[i] = cfg_.beta1 * mo.m.v[i] + (1.0 - cfg_.beta1) * gr;
        mo.v.v[i] = cfg_.beta2 * mo.v.v[i] + (1.0 - cfg_.beta2) * gr * gr;
        const double mhat = mo.m.v[i] / bc1;
        const double vhat = mo.v.v[i] / bc2;
        p.value.v[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      }
      p.zero_grad();
    }
  }
}

}  // namespace snnsc
