#include "snnsc/backbone.hpp"

#include <cmath>

#include "snnsc/adam.hpp"

namespace snnsc {

Backbone Backbone::attach(ModelParams& mp, const Config& cfg, Rng* init) {
  ParamGroup& edge = mp.group(ParamRole::kEdgeExtractor);
  ParamGroup& task = mp.group(ParamRole::kTaskHead);
  Backbone b;
  b.conv1 = Conv2d::attach(edge, "conv1", cfg.image_channels, cfg.backbone_hidden, 3, 1, 1, init);
  b.conv2 = Conv2d::attach(edge, "conv2", cfg.backbone_hidden, cfg.split_channels, 3, 2, 1, init);
  b.conv3 = Conv2d::attach(task, "conv3", cfg.split_channels, cfg.task_hidden, 3, 1, 1, init);
  b.conv4 = Conv2d::attach(task, "conv4", cfg.task_hidden, cfg.task_hidden, 3, 1, 1, init);
  b.head = Linear::attach(task, "head", cfg.task_hidden, cfg.classes, init);
  b.num_classes = cfg.classes;
  return b;
}

namespace {

Tensor relu(Tensor t) {
  for (double& x : t.v)
    if (x < 0) x = 0;
  return t;
}

Tensor spatial_mean_eval(const Tensor& t) {
  const int n = t.shape[0], c = t.shape[1], hw = t.shape[2] * t.shape[3];
  Tensor out = Tensor::zeros({n, c});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j) {
      double acc = 0;
      const double* p = t.data() + (static_cast<int64_t>(i) * c + j) * hw;
      for (int k = 0; k < hw; ++k) acc += p[k];
      out.v[static_cast<int64_t>(i) * c + j] = acc / hw;
    }
  return out;
}

}  // namespace

Tensor Backbone::extract_features(const Tensor& x) const {
  Tensor f = relu(conv2.forward(relu(conv1.forward(x))));
  require_finite("extract_features", f);
  return f;
}

Tensor Backbone::execute_task(const Tensor& f) const {
  Tensor h = relu(conv4.forward(relu(conv3.forward(f))));
  Tensor logits = head.forward(spatial_mean_eval(h));
  require_finite("execute_task", logits);
  return logits;
}

int Backbone::extract_features(Graph& g, int x, bool trainable) const {
  return g.relu(conv2.forward(g, g.relu(conv1.forward(g, x, trainable)), trainable));
}

int Backbone::execute_task(Graph& g, int f, bool trainable) const {
  const int h = g.relu(conv4.forward(g, g.relu(conv3.forward(g, f, trainable)), trainable));
  return head.forward(g, g.spatial_mean(h), trainable);
}

int argmax_row(const Tensor& logits, int row) {
  const int k = logits.shape.back();
  const double* p = logits.data() + static_cast<int64_t>(row) * k;
  int best = 0;
  for (int j = 1; j < k; ++j)
    if (p[j] > p[best]) best = j;
  return best;
}

double accuracy_from_logits(const Tensor& logits, const std::vector<int>& labels) {
  const int n = logits.shape[0];
  int hit = 0;
  for (int i = 0; i < n; ++i)
    if (argmax_row(logits, i) == labels[static_cast<size_t>(i)]) ++hit;
  return static_cast<double>(hit) / n;
}

double backbone_accuracy(const Backbone& b, const Dataset& d) {
  constexpr int kChunk = 256;
  std::vector<int> order(static_cast<size_t>(d.size()));
  for (int i = 0; i < d.size(); ++i) order[static_cast<size_t>(i)] = i;
  int hit = 0;
  for (int start = 0; start < d.size(); start += kChunk) {
    const int count = std::min(kChunk, d.size() - start);
    Tensor logits = b.forward(gather_images(d, order, start, count));
    const std::vector<int> labels = gather_labels(d, order, start, count);
    for (int i = 0; i < count; ++i)
      if (argmax_row(logits, i) == labels[static_cast<size_t>(i)]) ++hit;
  }
  return static_cast<double>(hit) / d.size();
}

TrainLog train_backbone(ModelParams& mp, const Dataset& train, const Dataset& test,
                        const Config& cfg) {
  Rng init(split_mix64(cfg.seed ^ 0xB0B0));
  Backbone b = Backbone::attach(mp, cfg, &init);
  Adam opt({cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps},
           {&mp.group(ParamRole::kEdgeExtractor), &mp.group(ParamRole::kTaskHead)});

  Rng rng(split_mix64(cfg.seed ^ 0xB0B1));
  std::vector<int> order(static_cast<size_t>(train.size()));
  for (int i = 0; i < train.size(); ++i) order[static_cast<size_t>(i)] = i;

  TrainLog log;
  for (int epoch = 0; epoch < cfg.backbone_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    int batches = 0;
    for (int start = 0; start + cfg.batch <= train.size(); start += cfg.batch) {
      Graph g;
      const int x = g.input(gather_images(train, order, start, cfg.batch));
      const int logits = b.execute_task(g, b.extract_features(g, x, true), true);
      const int loss = g.softmax_cross_entropy(logits, gather_labels(train, order, start, cfg.batch));
      const double loss_val = g.val(loss).item();
      if (!std::isfinite(loss_val)) throw DivergenceError("train_backbone: non-finite loss");
      g.backward(loss);
      opt.step();
      epoch_loss += loss_val;
      ++batches;
    }
    log.epoch_loss.push_back(epoch_loss / batches);
  }
  log.final_metric = backbone_accuracy(b, test);
  return log;
}

}  // namespace snnsc
