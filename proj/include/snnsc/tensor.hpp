#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnsc/errors.hpp"

namespace snnsc {

using Shape = std::vector<int>;

int64_t numel(const Shape& s);
std::string shape_str(const Shape& s);
bool shape_ok(const Shape& s);  // all dims positive

// Dense row-major (NCHW-style) tensor of doubles. Trained and evaluated in
// 64-bit throughout so finite-difference checks have headroom.
struct Tensor {
  Shape shape;
  std::vector<double> v;

  Tensor() = default;
  Tensor(Shape s, std::vector<double> values);

  static Tensor zeros(const Shape& s);
  static Tensor full(const Shape& s, double x);
  static Tensor scalar(double x);

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  double item() const;  // requires numel == 1
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// Binary-valued tensor; carries semantic payloads and prior bits.
struct SpikeTensor {
  Shape shape;
  std::vector<uint8_t> bits;  // each element 0 or 1

  SpikeTensor() = default;
  SpikeTensor(Shape s, std::vector<uint8_t> b);

  static SpikeTensor zeros(const Shape& s);
  int64_t size() const { return static_cast<int64_t>(bits.size()); }
  Tensor to_tensor() const;  // 0.0 / 1.0 values
  // Threshold-free conversion: every element must already be exactly 0 or 1.
  static SpikeTensor from_tensor(const Tensor& t);
};

void require_same_shape(const char* op, const Tensor& a, const Tensor& b);
void require_shape(const char* op, const Tensor& t, const Shape& want);
bool all_finite(const Tensor& t);
void require_finite(const char* op, const Tensor& t);

uint64_t fnv1a64(const void* data, size_t n);
uint64_t tensor_digest(const Tensor& t);

}  // namespace snnsc
