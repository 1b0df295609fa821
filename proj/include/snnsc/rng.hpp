#pragma once

#include <cstdint>
#include <vector>

namespace snnsc {

// Stafford mix13 finalizer stepped splitmix64-style; also used as the mixing
// stage of the counter PRF below.
inline uint64_t split_mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless PRF over (seed, stream, round, index). Channel replay and
// transcript determinism depend on this being a pure function of its key.
inline uint64_t counter_hash(uint64_t seed, uint64_t stream, uint64_t round, uint64_t index) {
  uint64_t h = split_mix64(seed);
  h = split_mix64(h ^ stream);
  h = split_mix64(h ^ round);
  h = split_mix64(h ^ index);
  return h;
}

// Uniform double in [0,1) from a 64-bit word.
inline double u64_to_unit(uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// Sequential generator for init and training-time sampling. Self-contained so
// two runs of the same binary replay bit-identically.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform() { return u64_to_unit(u64()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0.
  int uniform_int(int n) { return static_cast<int>(u64() % static_cast<uint64_t>(n)); }

  double normal();

  template <class T>
  void shuffle(std::vector<T>& xs) {
    for (size_t i = xs.size(); i > 1; --i) {
      size_t j = u64() % i;
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace snnsc
