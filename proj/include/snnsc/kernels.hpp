#pragma once

#include "snnsc/tensor.hpp"

namespace snnsc::kernels {

// x: (N,IC,H,W), w: (OC,IC,KH,KW), b: (OC). Zero padding, unit dilation.
Tensor conv2d_forward(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int pad);
// Accumulates into whichever of gx/gw/gb is non-null. gx/gw/gb must be
// pre-sized to match x/w/b.
void conv2d_backward(const Tensor& x, const Tensor& w, int stride, int pad, const Tensor& gout,
                     Tensor* gx, Tensor* gw, Tensor* gb);

// x: (N,IN), w: (OUT,IN), b: (OUT) -> (N,OUT).
Tensor linear_forward(const Tensor& x, const Tensor& w, const Tensor& b);
void linear_backward(const Tensor& x, const Tensor& w, const Tensor& gout, Tensor* gx, Tensor* gw,
                     Tensor* gb);

}  // namespace snnsc::kernels
