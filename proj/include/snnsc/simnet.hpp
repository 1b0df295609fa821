#pragma once

#include "snnsc/codec.hpp"

namespace snnsc {

// Similarity machinery: prior extraction with 1-bit quantization on the edge,
// similarity estimation from (reconstruction, noisy prior, channel BER) in
// the cloud, and the ground-truth cosine metric over task-head outputs.
struct SimNet {
  Conv2d se1, se2;  // prior-encoder group
  Linear sd1, sd2;  // similarity-head group
  int prior_bits = 0;
  Shape feature_shape;

  static SimNet attach(ModelParams& mp, const Config& cfg, Rng* init);

  // Sign-threshold at zero after global pooling; output (N, prior_bits, 1, 1).
  SpikeTensor extract_prior(const Tensor& f) const;

  // One clamped scalar per sample, in [-1, 1].
  std::vector<double> estimate_similarity(const Tensor& f_prime, const SpikeTensor& k_hat,
                                          double ber) const;
  double estimate_similarity_one(const Tensor& f_prime, const SpikeTensor& k_hat,
                                 double ber) const;
};

// Cosine similarity of the task-head outputs of f and f_prime, per sample.
// Throws NumericError if either logit vector has zero norm.
std::vector<double> true_similarity(const Backbone& b, const Tensor& f, const Tensor& f_prime);
double true_similarity_one(const Backbone& b, const Tensor& f, const Tensor& f_prime);

// Per-sample squared error against the true similarity labels, with the
// backbone and codec frozen; trains the prior-encoder and similarity-head
// groups. final_metric is the last epoch's mean squared error.
TrainLog train_simnet(ModelParams& mp, const Dataset& train, const Config& cfg);

}  // namespace snnsc
