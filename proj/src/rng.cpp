#include "snnsc/rng.hpp"

#include <cmath>

namespace snnsc {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // Box-Muller; u clamped away from 0 so log stays finite.
  double u = uniform();
  if (u < 1e-300) u = 1e-300;
  double r = std::sqrt(-2.0 * std::log(u));
  double theta = 2.0 * 3.14159265358979323846 * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace snnsc
