#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnsc/errors.hpp"

namespace snnsc {

// Effective experiment configuration. Plain-text sectioned key=value files;
// unknown keys are rejected. `dump()` is the canonical form used for the
// checkpoint config hash and the printed effective-config header.
struct Config {
  // [data] synthetic Gaussian-cluster dataset
  uint64_t seed = 7;
  int classes = 8;
  int image_channels = 1;
  int image_size = 8;
  int train_samples = 8000;
  int test_samples = 2000;
  double center_sigma = 1.0;
  double noise_sigma = 1.0;

  // [model]
  int split_channels = 16;    // feature = (split_channels, image_size/2, image_size/2)
  int backbone_hidden = 8;    // edge conv width
  int task_hidden = 16;       // task-head conv width
  int payload_channels = 2;   // per-step payload = (payload_channels, fh, fw)
  int prior_bits = 8;         // prior = (prior_bits, 1, 1)
  int min_steps = 4;
  int max_steps = 8;
  double v_th = 1.0;
  double v_reset = 0.0;
  double surrogate_k = 4.0;
  std::string encoder_reset = "soft";
  std::string recon_if_reset = "soft";
  std::string recon_ihf_reset = "soft";
  int encoder_hidden = 8;
  int recon_channels = 4;
  int sim_hidden = 64;

  // [train]
  int backbone_epochs = 12;
  int codec_epochs = 15;
  int finetune_epochs = 4;
  int simnet_epochs = 12;
  int baseline_codec_epochs = 12;
  int batch = 64;
  double lr = 1e-3;
  double finetune_lr = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double ber_lo = 0.0;
  double ber_hi = 0.3;

  // [eval]
  int eval_seeds = 5;
  int samples_per_cell = 1000;
  std::vector<double> sweep_bers = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  std::vector<double> corr_bers = {0.1, 0.2, 0.3};

  // [harq]
  std::vector<double> thetas;  // empty -> calibrated from quantiles
  std::vector<double> theta_quantiles = {0.35, 0.5, 0.65};
  std::vector<double> gap_bers = {0.0, 0.1, 0.2, 0.3};
  int calib_samples = 256;

  // [baseline]
  std::string fec_scheme = "repetition3";  // or hamming74
  int baseline_steps = 3;
  int64_t bit_budget = 864;
  std::vector<double> baseline_bers = {0.0, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  double knee_ber = 0.05;

  // [io]
  std::string out_dir = "runs/default";

  static Config defaults() { return Config{}; }
  static Config from_file(const std::string& path);

  // key is "section.name", e.g. "model.min_steps".
  void set(const std::string& key, const std::string& value);
  std::string dump() const;

  // Hash over the architecture-defining sections ([data] and [model]);
  // stored in checkpoints and verified when stages are chained.
  uint64_t model_hash() const;

  void validate() const;

  // Derived dimensions.
  int feature_size() const { return image_size / 2; }
  std::vector<int> feature_shape() const;
  std::vector<int> payload_shape() const;
  std::vector<int> prior_shape() const;
  int step_bits() const;
};

}  // namespace snnsc
