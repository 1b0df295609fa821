#include "snnsc/graph.hpp"

#include <cmath>

#include "snnsc/kernels.hpp"
#include "snnsc/rng.hpp"

namespace snnsc {

const char* role_tag(ParamRole r) {
  switch (r) {
    case ParamRole::kEdgeExtractor: return "mu";
    case ParamRole::kTaskHead: return "lambda";
    case ParamRole::kEncoder: return "alpha";
    case ParamRole::kReconstructor: return "beta";
    case ParamRole::kConverter: return "gamma";
    case ParamRole::kPriorEncoder: return "omega";
    case ParamRole::kSimilarityHead: return "phi";
  }
  throw ConfigError("unknown parameter role");
}

ParamRole role_from_tag(const std::string& tag) {
  for (int i = 0; i <= static_cast<int>(ParamRole::kSimilarityHead); ++i) {
    auto r = static_cast<ParamRole>(i);
    if (tag == role_tag(r)) return r;
  }
  throw ConfigError("unknown parameter group tag: " + tag);
}

Parameter& ParamGroup::at(const std::string& id) {
  auto it = params.find(id);
  if (it == params.end())
    throw ConfigError(std::string("parameter group ") + role_tag(role) + " has no layer " + id);
  return it->second;
}

const Parameter& ParamGroup::at(const std::string& id) const {
  auto it = params.find(id);
  if (it == params.end())
    throw ConfigError(std::string("parameter group ") + role_tag(role) + " has no layer " + id);
  return it->second;
}

Parameter& ParamGroup::create(const std::string& id, Tensor init) {
  if (has(id))
    throw ConfigError(std::string("parameter group ") + role_tag(role) + " already has " + id);
  Parameter p;
  p.value = std::move(init);
  return params.emplace(id, std::move(p)).first->second;
}

int64_t ParamGroup::total_entries() const {
  int64_t n = 0;
  for (const auto& [id, p] : params) n += p.value.size();
  return n;
}

uint64_t ParamGroup::checksum() const {
  uint64_t h = fnv1a64(role_tag(role), std::string(role_tag(role)).size());
  for (const auto& [id, p] : params) {
    h = split_mix64(h ^ fnv1a64(id.data(), id.size()));
    h = split_mix64(h ^ tensor_digest(p.value));
  }
  return h;
}

void ParamGroup::zero_grads() {
  for (auto& [id, p] : params) p.zero_grad();
}

int Graph::push(Node n, const char* op) {
  n.op = op;
  require_finite(op, n.value);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

bool Graph::any_needs_grad(const std::vector<int>& ids) const {
  for (int i : ids)
    if (nodes_[static_cast<size_t>(i)].needs_grad) return true;
  return false;
}

Tensor& Graph::grad_of(int id) {
  Node& n = node(id);
  if (n.grad.v.empty()) n.grad = Tensor::zeros(n.value.shape);
  return n.grad;
}

int Graph::input(Tensor t) {
  Node n;
  n.value = std::move(t);
  return push(std::move(n), "input");
}

int Graph::input(const SpikeTensor& s) { return input(s.to_tensor()); }

int Graph::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.needs_grad = true;
  n.leaf = &p;
  return push(std::move(n), "param");
}

int Graph::frozen(const Parameter& p) {
  Node n;
  n.value = p.value;
  return push(std::move(n), "frozen");
}

int Graph::add(int a, int b) {
  require_same_shape("add", val(a), val(b));
  Node n;
  n.value = val(a);
  for (int64_t i = 0; i < n.value.size(); ++i) n.value.v[i] += val(b).v[i];
  n.parents = {a, b};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, b](Graph& g, int self) {
    const Tensor& go = g.node(self).grad;
    if (g.node(a).needs_grad) {
      Tensor& ga = g.grad_of(a);
      for (int64_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i];
    }
    if (g.node(b).needs_grad) {
      Tensor& gb = g.grad_of(b);
      for (int64_t i = 0; i < go.size(); ++i) gb.v[i] += go.v[i];
    }
  };
  return push(std::move(n), "add");
}

int Graph::sub(int a, int b) {
  require_same_shape("sub", val(a), val(b));
  Node n;
  n.value = val(a);
  for (int64_t i = 0; i < n.value.size(); ++i) n.value.v[i] -= val(b).v[i];
  n.parents = {a, b};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, b](Graph& g, int self) {
    const Tensor& go = g.node(self).grad;
    if (g.node(a).needs_grad) {
      Tensor& ga = g.grad_of(a);
      for (int64_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i];
    }
    if (g.node(b).needs_grad) {
      Tensor& gb = g.grad_of(b);
      for (int64_t i = 0; i < go.size(); ++i) gb.v[i] -= go.v[i];
    }
  };
  return push(std::move(n), "sub");
}

int Graph::mul(int a, int b) {
  require_same_shape("mul", val(a), val(b));
  Node n;
  n.value = val(a);
  for (int64_t i = 0; i < n.value.size(); ++i) n.value.v[i] *= val(b).v[i];
  n.parents = {a, b};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, b](Graph& g, int self) {
    const Tensor& go = g.node(self).grad;
    if (g.node(a).needs_grad) {
      Tensor& ga = g.grad_of(a);
      const Tensor& bv = g.val(b);
      for (int64_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i] * bv.v[i];
    }
    if (g.node(b).needs_grad) {
      Tensor& gb = g.grad_of(b);
      const Tensor& av = g.val(a);
      for (int64_t i = 0; i < go.size(); ++i) gb.v[i] += go.v[i] * av.v[i];
    }
  };
  return push(std::move(n), "mul");
}

int Graph::scale(int a, double c) {
  Node n;
  n.value = val(a);
  for (double& x : n.value.v) x *= c;
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, c](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    Tensor& ga = g.grad_of(a);
    for (int64_t i = 0; i < go.size(); ++i) ga.v[i] += c * go.v[i];
  };
  return push(std::move(n), "scale");
}

int Graph::add_scalar(int a, double c) {
  Node n;
  n.value = val(a);
  for (double& x : n.value.v) x += c;
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    Tensor& ga = g.grad_of(a);
    for (int64_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i];
  };
  return push(std::move(n), "add_scalar");
}

int Graph::relu(int a) {
  Node n;
  n.value = val(a);
  for (double& x : n.value.v)
    if (x < 0) x = 0;
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& av = g.val(a);
    Tensor& ga = g.grad_of(a);
    for (int64_t i = 0; i < go.size(); ++i)
      if (av.v[i] > 0) ga.v[i] += go.v[i];
  };
  return push(std::move(n), "relu");
}

int Graph::sigmoid(int a) {
  Node n;
  n.value = val(a);
  for (double& x : n.value.v) x = 1.0 / (1.0 + std::exp(-x));
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& y = g.val(self);
    Tensor& ga = g.grad_of(a);
    for (int64_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i] * y.v[i] * (1.0 - y.v[i]);
  };
  return push(std::move(n), "sigmoid");
}

int Graph::clamp(int a, double lo, double hi) {
  Node n;
  n.value = val(a);
  for (double& x : n.value.v) x = x < lo ? lo : (x > hi ? hi : x);
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, lo, hi](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& av = g.val(a);
    Tensor& ga = g.grad_of(a);
    for (int64_t i = 0; i < go.size(); ++i)
      if (av.v[i] > lo && av.v[i] < hi) ga.v[i] += go.v[i];
  };
  return push(std::move(n), "clamp");
}

int Graph::reshape(int a, Shape s) {
  if (numel(s) != val(a).size()) {
    throw ShapeError("reshape: shape mismatch " + shape_str(val(a).shape) + " vs " + shape_str(s));
  }
  Node n;
  n.value = Tensor(std::move(s), val(a).v);
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    Tensor& ga = g.grad_of(a);
    for (int64_t i = 0; i < go.size(); ++i) ga.v[i] += go.v[i];
  };
  return push(std::move(n), "reshape");
}

int Graph::flatten_samples(int a) {
  const Tensor& t = val(a);
  if (t.shape.empty()) throw ShapeError("flatten_samples: scalar input");
  const int batch = t.shape[0];
  return reshape(a, {batch, static_cast<int>(t.size() / batch)});
}

int Graph::concat_samples(const std::vector<int>& parts) {
  if (parts.empty()) throw ConfigError("concat_samples: no inputs");
  const int batch = val(parts[0]).shape.empty() ? 0 : val(parts[0]).shape[0];
  int total = 0;
  std::vector<int> widths;
  for (int p : parts) {
    const Tensor& t = val(p);
    if (t.shape.empty() || t.shape[0] != batch) {
      throw ShapeError("concat_samples: shape mismatch " + shape_str(val(parts[0]).shape) +
                       " vs " + shape_str(t.shape) + " (batch axis)");
    }
    widths.push_back(static_cast<int>(t.size() / batch));
    total += widths.back();
  }
  Node n;
  n.value = Tensor::zeros({batch, total});
  int off = 0;
  for (size_t pi = 0; pi < parts.size(); ++pi) {
    const Tensor& t = val(parts[pi]);
    const int w = widths[pi];
    for (int b = 0; b < batch; ++b)
      for (int k = 0; k < w; ++k)
        n.value.v[static_cast<int64_t>(b) * total + off + k] =
            t.v[static_cast<int64_t>(b) * w + k];
    off += w;
  }
  n.parents = parts;
  n.needs_grad = any_needs_grad(n.parents);
  std::vector<int> ws = widths;
  std::vector<int> ps = parts;
  n.back = [ps, ws, batch, total](Graph& g, int self) {
    const Tensor& go = g.node(self).grad;
    int off = 0;
    for (size_t pi = 0; pi < ps.size(); ++pi) {
      const int w = ws[pi];
      if (g.node(ps[pi]).needs_grad) {
        Tensor& gp = g.grad_of(ps[pi]);
        for (int b = 0; b < batch; ++b)
          for (int k = 0; k < w; ++k)
            gp.v[static_cast<int64_t>(b) * w + k] +=
                go.v[static_cast<int64_t>(b) * total + off + k];
      }
      off += w;
    }
  };
  return push(std::move(n), "concat");
}

int Graph::zero_pad_samples(int a, int target_width) {
  const Tensor& t = val(a);
  if (t.shape.empty()) throw ShapeError("zero_pad: scalar input");
  const int batch = t.shape[0];
  const int w = static_cast<int>(t.size() / batch);
  if (target_width < w) {
    throw ShapeError("zero_pad: target width " + std::to_string(target_width) +
                     " smaller than input " + shape_str(t.shape));
  }
  Node n;
  n.value = Tensor::zeros({batch, target_width});
  for (int b = 0; b < batch; ++b)
    for (int k = 0; k < w; ++k)
      n.value.v[static_cast<int64_t>(b) * target_width + k] = t.v[static_cast<int64_t>(b) * w + k];
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, batch, w, target_width](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    Tensor& ga = g.grad_of(a);
    for (int b = 0; b < batch; ++b)
      for (int k = 0; k < w; ++k)
        ga.v[static_cast<int64_t>(b) * w + k] += go.v[static_cast<int64_t>(b) * target_width + k];
  };
  return push(std::move(n), "zero_pad");
}

int Graph::mean_all(int a) {
  const int64_t m = val(a).size();
  Node n;
  double acc = 0;
  for (double x : val(a).v) acc += x;
  n.value = Tensor::scalar(acc / static_cast<double>(m));
  n.parents = {a};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, m](Graph& g, int self) {
    if (!g.node(a).needs_grad) return;
    const double go = g.node(self).grad.v[0] / static_cast<double>(m);
    Tensor& ga = g.grad_of(a);
    for (int64_t i = 0; i < ga.size(); ++i) ga.v[i] += go;
  };
  return push(std::move(n), "mean");
}

int Graph::linear(int x, int w, int b) {
  Node n;
  n.value = kernels::linear_forward(val(x), val(w), val(b));
  n.parents = {x, w, b};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [x, w, b](Graph& g, int self) {
    const Tensor& go = g.node(self).grad;
    Tensor* gx = g.node(x).needs_grad ? &g.grad_of(x) : nullptr;
    Tensor* gw = g.node(w).needs_grad ? &g.grad_of(w) : nullptr;
    Tensor* gb = g.node(b).needs_grad ? &g.grad_of(b) : nullptr;
    kernels::linear_backward(g.val(x), g.val(w), go, gx, gw, gb);
  };
  return push(std::move(n), "linear");
}

int Graph::conv2d(int x, int w, int b, int stride, int pad) {
  Node n;
  n.value = kernels::conv2d_forward(val(x), val(w), val(b), stride, pad);
  n.parents = {x, w, b};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [x, w, b, stride, pad](Graph& g, int self) {
    const Tensor& go = g.node(self).grad;
    Tensor* gx = g.node(x).needs_grad ? &g.grad_of(x) : nullptr;
    Tensor* gw = g.node(w).needs_grad ? &g.grad_of(w) : nullptr;
    Tensor* gb = g.node(b).needs_grad ? &g.grad_of(b) : nullptr;
    kernels::conv2d_backward(g.val(x), g.val(w), stride, pad, go, gx, gw, gb);
  };
  return push(std::move(n), "conv2d");
}

int Graph::spatial_mean(int x) {
  const Tensor& t = val(x);
  if (t.shape.size() != 4) throw ShapeError("spatial_mean: input must be 4-D, got " + shape_str(t.shape));
  const int n0 = t.shape[0], c = t.shape[1], hw = t.shape[2] * t.shape[3];
  Node n;
  n.value = Tensor::zeros({n0, c});
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < c; ++j) {
      double acc = 0;
      const double* p = t.data() + (static_cast<int64_t>(i) * c + j) * hw;
      for (int k = 0; k < hw; ++k) acc += p[k];
      n.value.v[static_cast<int64_t>(i) * c + j] = acc / hw;
    }
  n.parents = {x};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [x, n0, c, hw](Graph& g, int self) {
    if (!g.node(x).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_of(x);
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < c; ++j) {
        const double gv = go.v[static_cast<int64_t>(i) * c + j] / hw;
        double* p = gx.data() + (static_cast<int64_t>(i) * c + j) * hw;
        for (int k = 0; k < hw; ++k) p[k] += gv;
      }
  };
  return push(std::move(n), "spatial_mean");
}

int Graph::softmax_cross_entropy(int logits, std::vector<int> labels) {
  const Tensor& z = val(logits);
  if (z.shape.size() != 2) throw ShapeError("cross_entropy: logits must be 2-D, got " + shape_str(z.shape));
  const int n0 = z.shape[0], k = z.shape[1];
  if (static_cast<int>(labels.size()) != n0)
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch " +
                     std::to_string(n0));
  for (int l : labels)
    if (l < 0 || l >= k) throw ConfigError("cross_entropy: label out of range");

  Tensor softmax = Tensor::zeros({n0, k});
  double loss = 0;
  for (int i = 0; i < n0; ++i) {
    const double* zi = z.data() + static_cast<int64_t>(i) * k;
    double m = zi[0];
    for (int j = 1; j < k; ++j) m = std::max(m, zi[j]);
    double sum = 0;
    for (int j = 0; j < k; ++j) sum += std::exp(zi[j] - m);
    const double lse = m + std::log(sum);
    for (int j = 0; j < k; ++j)
      softmax.v[static_cast<int64_t>(i) * k + j] = std::exp(zi[j] - m) / sum;
    loss += lse - zi[labels[static_cast<size_t>(i)]];
  }
  Node n;
  n.value = Tensor::scalar(loss / n0);
  n.parents = {logits};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [logits, labels = std::move(labels), softmax = std::move(softmax), n0,
            k](Graph& g, int self) {
    if (!g.node(logits).needs_grad) return;
    const double go = g.node(self).grad.v[0] / n0;
    Tensor& gz = g.grad_of(logits);
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < k; ++j) {
        double d = softmax.v[static_cast<int64_t>(i) * k + j];
        if (j == labels[static_cast<size_t>(i)]) d -= 1.0;
        gz.v[static_cast<int64_t>(i) * k + j] += go * d;
      }
  };
  return push(std::move(n), "cross_entropy");
}

int Graph::squared_error(int a, int b) {
  require_same_shape("squared_error", val(a), val(b));
  const int64_t m = val(a).size();
  double acc = 0;
  for (int64_t i = 0; i < m; ++i) {
    const double d = val(a).v[i] - val(b).v[i];
    acc += d * d;
  }
  Node n;
  n.value = Tensor::scalar(acc / static_cast<double>(m));
  n.parents = {a, b};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [a, b, m](Graph& g, int self) {
    const double go = g.node(self).grad.v[0] * 2.0 / static_cast<double>(m);
    const Tensor& av = g.val(a);
    const Tensor& bv = g.val(b);
    if (g.node(a).needs_grad) {
      Tensor& ga = g.grad_of(a);
      for (int64_t i = 0; i < m; ++i) ga.v[i] += go * (av.v[i] - bv.v[i]);
    }
    if (g.node(b).needs_grad) {
      Tensor& gb = g.grad_of(b);
      for (int64_t i = 0; i < m; ++i) gb.v[i] -= go * (av.v[i] - bv.v[i]);
    }
  };
  return push(std::move(n), "squared_error");
}

int Graph::fire(int m, double v_th, double k) {
  const Tensor& mv = val(m);
  Node n;
  n.value = Tensor::zeros(mv.shape);
  if (smooth_) {
    for (int64_t i = 0; i < mv.size(); ++i)
      n.value.v[i] = 1.0 / (1.0 + std::exp(-k * (mv.v[i] - v_th)));
  } else {
    for (int64_t i = 0; i < mv.size(); ++i) n.value.v[i] = mv.v[i] > v_th ? 1.0 : 0.0;
  }
  n.parents = {m};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [m, v_th, k](Graph& g, int self) {
    if (!g.node(m).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& mv = g.val(m);
    Tensor& gm = g.grad_of(m);
    for (int64_t i = 0; i < go.size(); ++i) {
      const double s = 1.0 / (1.0 + std::exp(-k * (mv.v[i] - v_th)));
      gm.v[i] += go.v[i] * k * s * (1.0 - s);
    }
  };
  return push(std::move(n), "fire");
}

int Graph::quantize_sign(int x) {
  const Tensor& xv = val(x);
  Node n;
  n.value = Tensor::zeros(xv.shape);
  if (smooth_) {
    for (int64_t i = 0; i < xv.size(); ++i)
      n.value.v[i] = xv.v[i] < -1.0 ? -1.0 : (xv.v[i] > 1.0 ? 1.0 : xv.v[i]);
  } else {
    for (int64_t i = 0; i < xv.size(); ++i) n.value.v[i] = xv.v[i] > 0.0 ? 1.0 : 0.0;
  }
  n.parents = {x};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [x](Graph& g, int self) {
    if (!g.node(x).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    const Tensor& xv = g.val(x);
    Tensor& gx = g.grad_of(x);
    for (int64_t i = 0; i < go.size(); ++i)
      if (xv.v[i] >= -1.0 && xv.v[i] <= 1.0) gx.v[i] += go.v[i];
  };
  return push(std::move(n), "quantize_sign");
}

int Graph::bsc_flip(int x, std::vector<uint8_t> flip_mask) {
  const Tensor& xv = val(x);
  if (static_cast<int64_t>(flip_mask.size()) != xv.size())
    throw ShapeError("bsc_flip: mask length " + std::to_string(flip_mask.size()) +
                     " vs input " + shape_str(xv.shape));
  Node n;
  n.value = xv;
  if (!smooth_) {
    for (int64_t i = 0; i < xv.size(); ++i)
      if (flip_mask[static_cast<size_t>(i)]) n.value.v[i] = 1.0 - xv.v[i];
  }
  n.parents = {x};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [x](Graph& g, int self) {
    if (!g.node(x).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_of(x);
    for (int64_t i = 0; i < go.size(); ++i) gx.v[i] += go.v[i];
  };
  return push(std::move(n), "bsc_flip");
}

int Graph::binary_entropy_per_sample(int x) {
  const Tensor& t = val(x);
  if (t.shape.empty()) throw ShapeError("entropy: scalar input");
  const int batch = t.shape[0];
  const int64_t m = t.size() / batch;
  Node n;
  n.value = Tensor::zeros({batch});
  std::vector<double> qs(static_cast<size_t>(batch));
  for (int b = 0; b < batch; ++b) {
    double q = 0;
    const double* p = t.data() + b * m;
    for (int64_t i = 0; i < m; ++i) q += p[i];
    q /= static_cast<double>(m);
    qs[static_cast<size_t>(b)] = q;
    n.value.v[b] = (q <= 0.0 || q >= 1.0)
                       ? 0.0
                       : -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
  }
  n.parents = {x};
  n.needs_grad = any_needs_grad(n.parents);
  n.back = [x, qs = std::move(qs), batch, m](Graph& g, int self) {
    if (!g.node(x).needs_grad) return;
    const Tensor& go = g.node(self).grad;
    Tensor& gx = g.grad_of(x);
    for (int b = 0; b < batch; ++b) {
      const double q = qs[static_cast<size_t>(b)];
      if (q <= 0.0 || q >= 1.0) continue;
      const double dq = std::log2((1.0 - q) / q) * go.v[b] / static_cast<double>(m);
      double* p = gx.data() + b * m;
      for (int64_t i = 0; i < m; ++i) p[i] += dq;
    }
  };
  return push(std::move(n), "entropy");
}

void Graph::backward(int loss_node) {
  Node& loss = node(loss_node);
  if (loss.value.size() != 1)
    throw ShapeError("backward: loss must be scalar, got " + shape_str(loss.value.shape));
  if (!loss.needs_grad) return;  // nothing trainable upstream
  grad_of(loss_node).v[0] = 1.0;
  for (int id = loss_node; id >= 0; --id) {
    Node& n = node(id);
    if (!n.needs_grad || n.grad.v.empty()) continue;
    if (n.leaf != nullptr) {
      n.leaf->ensure_grad();
      for (int64_t i = 0; i < n.grad.size(); ++i) n.leaf->grad.v[i] += n.grad.v[i];
    } else if (n.back) {
      n.back(*this, id);
    }
  }
}

}  // namespace snnsc
