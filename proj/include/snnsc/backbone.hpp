#pragma once

#include "snnsc/checkpoint.hpp"
#include "snnsc/config.hpp"
#include "snnsc/dataset.hpp"
#include "snnsc/nn.hpp"

namespace snnsc {

// Split classifier: two conv layers on the edge, two conv layers plus a
// linear readout in the cloud. The split feature is
// (split_channels, image_size/2, image_size/2).
struct Backbone {
  Conv2d conv1, conv2;  // edge half
  Conv2d conv3, conv4;  // task half
  Linear head;
  int num_classes = 0;

  static Backbone attach(ModelParams& mp, const Config& cfg, Rng* init);

  Tensor extract_features(const Tensor& x) const;
  Tensor execute_task(const Tensor& f) const;
  Tensor forward(const Tensor& x) const { return execute_task(extract_features(x)); }

  int extract_features(Graph& g, int x, bool trainable) const;
  int execute_task(Graph& g, int f, bool trainable) const;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  double final_metric = 0.0;  // stage-specific (accuracy or mse)
};

int argmax_row(const Tensor& logits, int row);
double accuracy_from_logits(const Tensor& logits, const std::vector<int>& labels);

// Classification accuracy of f_T(f_E(x)) over a dataset, evaluated in chunks.
double backbone_accuracy(const Backbone& b, const Dataset& d);

// Trains the edge+task groups with cross-entropy. Throws DivergenceError if
// the loss goes non-finite.
TrainLog train_backbone(ModelParams& mp, const Dataset& train, const Dataset& test,
                        const Config& cfg);

}  // namespace snnsc
