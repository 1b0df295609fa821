#pragma once

#include <utility>
#include <vector>

#include "snnsc/backbone.hpp"
#include "snnsc/checkpoint.hpp"
#include "snnsc/neurons.hpp"

namespace snnsc {

struct CodecConfig {
  int min_steps = 4;
  int max_steps = 8;
  Shape feature_shape;  // (C, H, W)
  Shape payload_shape;  // (payload_channels, H, W)
  int encoder_hidden = 8;
  int recon_channels = 4;
  NeuronConfig enc_neuron;
  NeuronConfig rec_if_neuron;
  NeuronConfig rec_ihf_neuron;

  static CodecConfig from(const Config& cfg);
  // Fixed-rate variant for the separate-coding baseline: runs exactly
  // `baseline_steps` steps (min == max).
  static CodecConfig baseline_from(const Config& cfg);

  void validate() const;
  int step_bits() const { return static_cast<int>(numel(payload_shape)); }
  int per_step_width() const {
    return 2 * recon_channels * feature_shape[1] * feature_shape[2];
  }
  int converter_in() const { return max_steps * per_step_width(); }
};

// Reconstructor outputs per step: (spike-head tensor, membrane-head tensor),
// each (N, recon_channels, H, W).
using StepOutputs = std::vector<std::pair<Tensor, Tensor>>;

// Spiking encoder (two 1x1 convs + IF), spiking reconstructor (1x1 conv with
// parallel IF / IHF heads), dense converter over the zero-padded
// concatenation of all step outputs.
struct Codec {
  CodecConfig cfg;
  Conv2d enc1, enc2;    // encoder group
  Conv2d rec;           // reconstructor group
  Linear converter;     // converter group

  static Codec attach(ModelParams& mp, const CodecConfig& cfg, Rng* init);

  // Concatenates (spike, membrane) pairs for steps 1..t in order, pads steps
  // t+1..max with zeros, applies the dense converter. t must lie in
  // [min_steps, max_steps] and match outputs.size().
  Tensor convert(const StepOutputs& outputs, int t) const;

 private:
  int per_step_width_check(const StepOutputs& outputs) const;
};

// Stateful evaluation session over one feature batch. Encoder and
// reconstructor membrane state persists across steps until the session ends.
class CodecEvalSession {
 public:
  CodecEvalSession(const Codec& codec, Tensor feature);

  SpikeTensor encode_step();
  void receive_step(const SpikeTensor& s_hat);
  Tensor convert_current() const;

  int steps_encoded() const { return encoded_; }
  int steps_received() const { return static_cast<int>(outputs_.size()); }
  const StepOutputs& outputs() const { return outputs_; }

 private:
  const Codec* codec_;
  Tensor input_current_;  // encoder conv stack output, constant per session
  NeuronState enc_state_;
  NeuronState rec_if_state_;
  NeuronState rec_ihf_state_;
  StepOutputs outputs_;
  int encoded_ = 0;
};

// Binary entropy of the spike frequency; exactly 0 for constant tensors.
double spike_entropy(const SpikeTensor& s);

// ((mean entropy) - 1)^2, the bandwidth-efficiency regularizer.
double entropy_regularizer(const std::vector<double>& entropies);

// Cross-entropy of `logits` ((K) or (1,K)) against `label` plus the entropy
// regularizer over the transmitted payloads.
double codec_loss(const Tensor& logits, int label, const std::vector<SpikeTensor>& payloads);

struct CodecTrainOpts {
  CodecConfig codec;
  int epochs = 1;
  int batch = 64;
  double lr = 1e-3;
  double ber_lo = 0.0;
  double ber_hi = 0.3;
  bool train_backbone_too = false;  // joint fine-tuning stage
  uint64_t rng_salt = 0;            // distinguishes training stages
};

// Algorithm: sample steps uniform on [min,max], sample BER, run
// encode -> channel -> reconstruct for each step, pad, convert, task head,
// cross-entropy + entropy regularizer, update codec groups (plus the
// backbone groups when train_backbone_too).
TrainLog train_codec_stage(ModelParams& mp, const Dataset& train, const Config& cfg,
                           const CodecTrainOpts& opts);

TrainLog train_codec(ModelParams& mp, const Dataset& train, const Config& cfg);
TrainLog joint_finetune(ModelParams& mp, const Dataset& train, const Config& cfg);
TrainLog train_baseline_codec(ModelParams& baseline_mp, const Dataset& train, const Config& cfg);

}  // namespace snnsc
