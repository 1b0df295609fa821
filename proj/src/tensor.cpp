#include "snnsc/tensor.hpp"

#include <cmath>
#include <sstream>

namespace snnsc {

int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) n *= d;
  return n;
}

bool shape_ok(const Shape& s) {
  for (int d : s)
    if (d <= 0) return false;
  return true;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ',';
    os << s[i];
  }
  os << ')';
  return os.str();
}

Tensor::Tensor(Shape s, std::vector<double> values) : shape(std::move(s)), v(std::move(values)) {
  if (!shape_ok(shape) || numel(shape) != static_cast<int64_t>(v.size())) {
    throw ShapeError("tensor: shape " + shape_str(shape) + " does not match " +
                     std::to_string(v.size()) + " values");
  }
}

Tensor Tensor::zeros(const Shape& s) {
  Tensor t;
  t.shape = s;
  t.v.assign(static_cast<size_t>(numel(s)), 0.0);
  return t;
}

Tensor Tensor::full(const Shape& s, double x) {
  Tensor t = zeros(s);
  for (double& e : t.v) e = x;
  return t;
}

Tensor Tensor::scalar(double x) { return Tensor({1}, {x}); }

double Tensor::item() const {
  if (v.size() != 1) throw ShapeError("item: tensor has shape " + shape_str(shape));
  return v[0];
}

SpikeTensor::SpikeTensor(Shape s, std::vector<uint8_t> b) : shape(std::move(s)), bits(std::move(b)) {
  if (!shape_ok(shape) || numel(shape) != static_cast<int64_t>(bits.size())) {
    throw ShapeError("spike tensor: shape " + shape_str(shape) + " does not match " +
                     std::to_string(bits.size()) + " bits");
  }
  for (uint8_t x : bits) {
    if (x > 1) throw NumericError("spike tensor: element not in {0,1}");
  }
}

SpikeTensor SpikeTensor::zeros(const Shape& s) {
  SpikeTensor t;
  t.shape = s;
  t.bits.assign(static_cast<size_t>(numel(s)), 0);
  return t;
}

Tensor SpikeTensor::to_tensor() const {
  Tensor t = Tensor::zeros(shape);
  for (size_t i = 0; i < bits.size(); ++i) t.v[i] = bits[i] ? 1.0 : 0.0;
  return t;
}

SpikeTensor SpikeTensor::from_tensor(const Tensor& t) {
  SpikeTensor s;
  s.shape = t.shape;
  s.bits.resize(t.v.size());
  for (size_t i = 0; i < t.v.size(); ++i) {
    if (t.v[i] == 0.0)
      s.bits[i] = 0;
    else if (t.v[i] == 1.0)
      s.bits[i] = 1;
    else
      throw NumericError("from_tensor: element " + std::to_string(t.v[i]) + " is not binary");
  }
  return s;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                     shape_str(b.shape));
  }
}

void require_shape(const char* op, const Tensor& t, const Shape& want) {
  if (t.shape != want) {
    throw ShapeError(std::string(op) + ": expected shape " + shape_str(want) + ", got " +
                     shape_str(t.shape));
  }
}

bool all_finite(const Tensor& t) {
  for (double x : t.v)
    if (!std::isfinite(x)) return false;
  return true;
}

void require_finite(const char* op, const Tensor& t) {
  if (!all_finite(t)) throw NumericError(std::string(op) + ": non-finite value in output");
}

uint64_t fnv1a64(const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 1469598103934665603ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t tensor_digest(const Tensor& t) {
  uint64_t h = fnv1a64(t.v.data(), t.v.size() * sizeof(double));
  for (int d : t.shape) h = fnv1a64(&d, sizeof(d)) ^ (h * 1099511628211ULL);
  return h;
}

}  // namespace snnsc
