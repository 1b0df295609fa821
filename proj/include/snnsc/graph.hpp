#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "snnsc/tensor.hpp"

namespace snnsc {

// One trainable tensor. Gradients accumulate here during Graph::backward.
struct Parameter {
  Tensor value;
  Tensor grad;  // empty until training touches it

  bool has_grad() const { return !grad.v.empty(); }
  void ensure_grad() {
    if (!has_grad()) grad = Tensor::zeros(value.shape);
  }
  void zero_grad() {
    ensure_grad();
    for (double& g : grad.v) g = 0.0;
  }
};

// Checkpoint identity of the seven parameter groups.
enum class ParamRole {
  kEdgeExtractor = 0,   // feature-extraction half of the classifier
  kTaskHead = 1,        // task-execution half
  kEncoder = 2,         // spiking encoder
  kReconstructor = 3,   // spiking reconstructor
  kConverter = 4,       // dense converter
  kPriorEncoder = 5,    // prior-extraction net
  kSimilarityHead = 6,  // similarity-estimation net
};

const char* role_tag(ParamRole r);
ParamRole role_from_tag(const std::string& tag);

struct ParamGroup {
  ParamRole role{};
  std::map<std::string, Parameter> params;  // layer-id -> parameter (ordered)

  Parameter& at(const std::string& id);
  const Parameter& at(const std::string& id) const;
  bool has(const std::string& id) const { return params.count(id) != 0; }
  Parameter& create(const std::string& id, Tensor init);

  int64_t total_entries() const;
  uint64_t checksum() const;  // value digest; freeze contracts compare this
  void zero_grads();
};

// Define-by-run reverse-mode tape. Rebuilt per training step.
//
// Three ops have a non-differentiable forward (spike fire, sign quantizer,
// bit-flip channel). Each registers a surrogate backward, and in
// smooth-gradient mode the forward itself is replaced by the function whose
// exact derivative equals that backward, so central finite differences check
// the surrogate path like any other op.
class Graph {
 public:
  explicit Graph(bool smooth_gradients = false) : smooth_(smooth_gradients) {}

  // Leaves.
  int input(Tensor t);
  int input(const SpikeTensor& s);
  int param(Parameter& p);          // gradient accumulates into p.grad
  int frozen(const Parameter& p);   // constant: gradient flows through, not into

  // Elementwise.
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int scale(int a, double c);
  int add_scalar(int a, double c);
  int relu(int a);
  int sigmoid(int a);
  int clamp(int a, double lo, double hi);

  // Shape. Per-sample layouts are (N, ...); flat ops keep the batch axis.
  int reshape(int a, Shape s);
  int flatten_samples(int a);                    // (N,...) -> (N,M)
  int concat_samples(const std::vector<int>& parts);  // (N,a)+(N,b) -> (N,a+b)
  int zero_pad_samples(int a, int target_width);      // (N,k) -> (N,target), zeros appended

  // Reductions.
  int mean_all(int a);  // scalar

  // NN primitives.
  int linear(int x, int w, int b);
  int conv2d(int x, int w, int b, int stride, int pad);
  int spatial_mean(int x);  // (N,C,H,W) -> (N,C)

  // Losses. Both reduce to a scalar mean over the batch.
  int softmax_cross_entropy(int logits, std::vector<int> labels);
  int squared_error(int a, int b);

  // Spiking / channel / quantization.
  int fire(int m, double v_th, double k);               // {0,1}; surrogate k*s*(1-s)
  int quantize_sign(int x);                             // {0,1}; straight-through on [-1,1]
  int bsc_flip(int x, std::vector<uint8_t> flip_mask);  // straight-through identity
  int binary_entropy_per_sample(int x);                 // (N,...) -> (N)

  void backward(int loss_node);

  const Tensor& val(int id) const { return nodes_[static_cast<size_t>(id)].value; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  bool smooth() const { return smooth_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    Parameter* leaf = nullptr;
    std::vector<int> parents;
    std::function<void(Graph&, int)> back;  // distribute grad to parents
    const char* op = "";
  };

  int push(Node n, const char* op);
  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  bool any_needs_grad(const std::vector<int>& ids) const;
  Tensor& grad_of(int id);

  std::vector<Node> nodes_;
  bool smooth_;
};

}  // namespace snnsc
