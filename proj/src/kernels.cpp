#include "snnsc/kernels.hpp"

namespace snnsc::kernels {

namespace {

void check_conv_args(const Tensor& x, const Tensor& w, const Tensor* b, int stride, int pad) {
  if (x.shape.size() != 4) throw ShapeError("conv2d: input must be 4-D, got " + shape_str(x.shape));
  if (w.shape.size() != 4) throw ShapeError("conv2d: kernel must be 4-D, got " + shape_str(w.shape));
  if (x.shape[1] != w.shape[1]) {
    throw ShapeError("conv2d: shape mismatch " + shape_str(x.shape) + " vs " + shape_str(w.shape) +
                     " (channel count)");
  }
  if (b && (b->shape.size() != 1 || b->shape[0] != w.shape[0])) {
    throw ShapeError("conv2d: bias shape " + shape_str(b->shape) + " vs kernel " +
                     shape_str(w.shape));
  }
  if (stride < 1 || pad < 0) throw ConfigError("conv2d: bad stride/pad");
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad) {
  check_conv_args(x, w, &b, stride, pad);
  const int n = x.shape[0], ic = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const int oc = w.shape[0], kh = w.shape[2], kw = w.shape[3];
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  if (oh <= 0 || ow <= 0) {
    throw ShapeError("conv2d: kernel " + shape_str(w.shape) + " too large for input " +
                     shape_str(x.shape));
  }
  Tensor out = Tensor::zeros({n, oc, oh, ow});
  const double* xp = x.data();
  const double* wp = w.data();
  double* op = out.data();
  for (int in = 0; in < n; ++in) {
    for (int o = 0; o < oc; ++o) {
      for (int y = 0; y < oh; ++y) {
        for (int z = 0; z < ow; ++z) {
          double acc = b.v[o];
          for (int c = 0; c < ic; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = y * stride - pad + ky;
              if (iy < 0 || iy >= h) continue;
              for (int kz = 0; kz < kw; ++kz) {
                const int iz = z * stride - pad + kz;
                if (iz < 0 || iz >= wd) continue;
                acc += xp[((in * ic + c) * h + iy) * wd + iz] *
                       wp[((o * ic + c) * kh + ky) * kw + kz];
              }
            }
          }
          op[((in * oc + o) * oh + y) * ow + z] = acc;
        }
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& x, const Tensor& w, int stride, int pad, const Tensor& gout,
                     Tensor* gx, Tensor* gw, Tensor* gb) {
  check_conv_args(x, w, nullptr, stride, pad);
  const int n = x.shape[0], ic = x.shape[1], h = x.shape[2], wd = x.shape[3];
  const int oc = w.shape[0], kh = w.shape[2], kw = w.shape[3];
  const int oh = gout.shape[2], ow = gout.shape[3];
  const double* xp = x.data();
  const double* wp = w.data();
  const double* gp = gout.data();
  for (int in = 0; in < n; ++in) {
    for (int o = 0; o < oc; ++o) {
      for (int y = 0; y < oh; ++y) {
        for (int z = 0; z < ow; ++z) {
          const double g = gp[((in * oc + o) * oh + y) * ow + z];
          if (gb) gb->v[o] += g;
          if (!gx && !gw) continue;
          for (int c = 0; c < ic; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = y * stride - pad + ky;
              if (iy < 0 || iy >= h) continue;
              for (int kz = 0; kz < kw; ++kz) {
                const int iz = z * stride - pad + kz;
                if (iz < 0 || iz >= wd) continue;
                const int xi = ((in * ic + c) * h + iy) * wd + iz;
                const int wi = ((o * ic + c) * kh + ky) * kw + kz;
                if (gw) gw->v[wi] += xp[xi] * g;
                if (gx) gx->v[xi] += wp[wi] * g;
              }
            }
          }
        }
      }
    }
  }
}

Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.shape.size() != 2 || w.shape.size() != 2 || x.shape[1] != w.shape[1]) {
    throw ShapeError("linear: shape mismatch " + shape_str(x.shape) + " vs " + shape_str(w.shape));
  }
  if (b.shape.size() != 1 || b.shape[0] != w.shape[0]) {
    throw ShapeError("linear: bias shape " + shape_str(b.shape) + " vs weight " +
                     shape_str(w.shape));
  }
  const int n = x.shape[0], in_dim = x.shape[1], out_dim = w.shape[0];
  Tensor out = Tensor::zeros({n, out_dim});
  for (int i = 0; i < n; ++i) {
    const double* xi = x.data() + static_cast<int64_t>(i) * in_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double* wo = w.data() + static_cast<int64_t>(o) * in_dim;
      double acc = b.v[o];
      for (int k = 0; k < in_dim; ++k) acc += xi[k] * wo[k];
      out.v[static_cast<int64_t>(i) * out_dim + o] = acc;
    }
  }
  return out;
}

void linear_backward(const Tensor& x, const Tensor& w, const Tensor& gout, Tensor* gx, Tensor* gw,
                     Tensor* gb) {
  const int n = x.shape[0], in_dim = x.shape[1], out_dim = w.shape[0];
  for (int i = 0; i < n; ++i) {
    const double* xi = x.data() + static_cast<int64_t>(i) * in_dim;
    const double* gi = gout.data() + static_cast<int64_t>(i) * out_dim;
    for (int o = 0; o < out_dim; ++o) {
      const double g = gi[o];
      if (gb) gb->v[o] += g;
      const double* wo = w.data() + static_cast<int64_t>(o) * in_dim;
      if (gw) {
        double* gwo = gw->data() + static_cast<int64_t>(o) * in_dim;
        for (int k = 0; k < in_dim; ++k) gwo[k] += xi[k] * g;
      }
      if (gx) {
        double* gxi = gx->data() + static_cast<int64_t>(i) * in_dim;
        for (int k = 0; k < in_dim; ++k) gxi[k] += wo[k] * g;
      }
    }
  }
}

}  // namespace snnsc::kernels
