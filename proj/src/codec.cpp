#include "snnsc/codec.hpp"

#include <cmath>

#include "snnsc/adam.hpp"

namespace snnsc {

namespace {

ResetMode parse_reset(const std::string& s) {
  return s == "hard" ? ResetMode::kHard : ResetMode::kSoft;
}

NeuronConfig neuron_from(const Config& cfg, const std::string& reset) {
  NeuronConfig n;
  n.v_th = cfg.v_th;
  n.v_reset = cfg.v_reset;
  n.surrogate_k = cfg.surrogate_k;
  n.reset = parse_reset(reset);
  return n;
}

}  // namespace

CodecConfig CodecConfig::from(const Config& cfg) {
  CodecConfig c;
  c.min_steps = cfg.min_steps;
  c.max_steps = cfg.max_steps;
  c.feature_shape = cfg.feature_shape();
  c.payload_shape = cfg.payload_shape();
  c.encoder_hidden = cfg.encoder_hidden;
  c.recon_channels = cfg.recon_channels;
  c.enc_neuron = neuron_from(cfg, cfg.encoder_reset);
  c.rec_if_neuron = neuron_from(cfg, cfg.recon_if_reset);
  c.rec_ihf_neuron = neuron_from(cfg, cfg.recon_ihf_reset);
  c.validate();
  return c;
}

CodecConfig CodecConfig::baseline_from(const Config& cfg) {
  CodecConfig c = from(cfg);
  // Fixed rate: the session always runs exactly baseline_steps steps. The
  // converter is sized for that count, so there is no padding headroom.
  c.min_steps = cfg.baseline_steps;
  c.max_steps = cfg.baseline_steps;
  return c;  // min == max is legal for the codec itself; only the multi-rate
             // config demands min < max (validated by Config).
}

void CodecConfig::validate() const {
  if (min_steps < 1 || min_steps > max_steps)
    throw ConfigError("codec: need 1 <= min_steps <= max_steps");
  if (feature_shape.size() != 3 || payload_shape.size() != 3)
    throw ConfigError("codec: feature and payload shapes must be (C,H,W)");
  if (feature_shape[1] != payload_shape[1] || feature_shape[2] != payload_shape[2])
    throw ConfigError("codec: payload spatial dims must match the feature");
}

Codec Codec::attach(ModelParams& mp, const CodecConfig& cfg, Rng* init) {
  cfg.validate();
  Codec c;
  c.cfg = cfg;
  ParamGroup& enc = mp.group(ParamRole::kEncoder);
  ParamGroup& rec = mp.group(ParamRole::kReconstructor);
  ParamGroup& conv = mp.group(ParamRole::kConverter);
  const int fc = cfg.feature_shape[0];
  c.enc1 = Conv2d::attach(enc, "enc1", fc, cfg.encoder_hidden, 1, 1, 0, init);
  c.enc2 = Conv2d::attach(enc, "enc2", cfg.encoder_hidden, cfg.payload_shape[0], 1, 1, 0, init);
  c.rec = Conv2d::attach(rec, "rec", cfg.payload_shape[0], cfg.recon_channels, 1, 1, 0, init);
  c.converter = Linear::attach(conv, "converter", cfg.converter_in(),
                               static_cast<int>(numel(cfg.feature_shape)), init);
  return c;
}

Tensor Codec::convert(const StepOutputs& outputs, int t) const {
  if (t < cfg.min_steps || t > cfg.max_steps)
    throw ConfigError("convert: t=" + std::to_string(t) + " outside [" +
                      std::to_string(cfg.min_steps) + "," + std::to_string(cfg.max_steps) + "]");
  if (static_cast<int>(outputs.size()) != t)
    throw ConfigError("convert: " + std::to_string(outputs.size()) + " step outputs for t=" +
                      std::to_string(t));
  const int n = outputs[0].first.shape[0];
  const int w = per_step_width_check(outputs);
  Tensor flat = Tensor::zeros({n, cfg.converter_in()});
  for (int s = 0; s < t; ++s) {
    const Tensor& fs = outputs[static_cast<size_t>(s)].first;
    const Tensor& fm = outputs[static_cast<size_t>(s)].second;
    const int half = w / 2;
    for (int i = 0; i < n; ++i) {
      double* dst = flat.data() + static_cast<int64_t>(i) * cfg.converter_in() + s * w;
      const double* ps = fs.data() + static_cast<int64_t>(i) * half;
      const double* pm = fm.data() + static_cast<int64_t>(i) * half;
      for (int k = 0; k < half; ++k) dst[k] = ps[k];
      for (int k = 0; k < half; ++k) dst[half + k] = pm[k];
    }
  }
  Tensor out = converter.forward(flat);
  Shape fshape = {n, cfg.feature_shape[0], cfg.feature_shape[1], cfg.feature_shape[2]};
  Tensor reshaped(fshape, std::move(out.v));
  require_finite("convert", reshaped);
  return reshaped;
}

int Codec::per_step_width_check(const StepOutputs& outputs) const {
  const Shape want = {outputs[0].first.shape[0], cfg.recon_channels, cfg.feature_shape[1],
                      cfg.feature_shape[2]};
  for (const auto& [fs, fm] : outputs) {
    require_shape("convert (spike head)", fs, want);
    require_shape("convert (membrane head)", fm, want);
  }
  return cfg.per_step_width();
}

CodecEvalSession::CodecEvalSession(const Codec& codec, Tensor feature) : codec_(&codec) {
  const CodecConfig& cfg = codec.cfg;
  const Shape want = {feature.shape.empty() ? 0 : feature.shape[0], cfg.feature_shape[0],
                      cfg.feature_shape[1], cfg.feature_shape[2]};
  require_shape("encode_step", feature, want);
  Tensor h = codec.enc1.forward(feature);
  for (double& x : h.v)
    if (x < 0) x = 0;
  input_current_ = codec.enc2.forward(h);
  require_finite("encode_step", input_current_);

  const int n = feature.shape[0];
  const Shape payload = {n, cfg.payload_shape[0], cfg.payload_shape[1], cfg.payload_shape[2]};
  const Shape head = {n, cfg.recon_channels, cfg.feature_shape[1], cfg.feature_shape[2]};
  enc_state_ = NeuronState::make(NeuronKind::kIF, cfg.enc_neuron, payload);
  rec_if_state_ = NeuronState::make(NeuronKind::kIF, cfg.rec_if_neuron, head);
  rec_ihf_state_ = NeuronState::make(NeuronKind::kIHF, cfg.rec_ihf_neuron, head);
}

SpikeTensor CodecEvalSession::encode_step() {
  if (encoded_ >= codec_->cfg.max_steps)
    throw ConfigError("encode_step: session already ran max_steps");
  ++encoded_;
  return if_step(enc_state_, input_current_);
}

void CodecEvalSession::receive_step(const SpikeTensor& s_hat) {
  const Shape& ms = enc_state_.membrane.shape;
  if (s_hat.shape != ms)
    throw ShapeError("receive_step: shape mismatch " + shape_str(s_hat.shape) + " vs " +
                     shape_str(ms));
  Tensor current = codec_->rec.forward(s_hat.to_tensor());
  SpikeTensor fs = if_step(rec_if_state_, current);
  IhfStepOut ihf = ihf_step(rec_ihf_state_, current);
  outputs_.emplace_back(fs.to_tensor(), std::move(ihf.membrane_out));
}

Tensor CodecEvalSession::convert_current() const {
  return codec_->convert(outputs_, steps_received());
}

double spike_entropy(const SpikeTensor& s) {
  if (s.size() == 0) throw ConfigError("spike_entropy: empty tensor");
  double q = 0;
  for (uint8_t b : s.bits) q += b;
  q /= static_cast<double>(s.size());
  if (q <= 0.0 || q >= 1.0) return 0.0;
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double entropy_regularizer(const std::vector<double>& entropies) {
  if (entropies.empty()) throw ConfigError("entropy_regularizer: no entropies");
  double mean = 0;
  for (double h : entropies) mean += h;
  mean /= static_cast<double>(entropies.size());
  return (mean - 1.0) * (mean - 1.0);
}

double codec_loss(const Tensor& logits, int label, const std::vector<SpikeTensor>& payloads) {
  if (payloads.empty()) throw ConfigError("codec_loss: need at least one payload");
  const int k = logits.shape.back();
  if (static_cast<int64_t>(k) != logits.size())
    throw ShapeError("codec_loss: logits must be a single row, got " + shape_str(logits.shape));
  if (label < 0 || label >= k) throw ConfigError("codec_loss: label out of range");
  double m = logits.v[0];
  for (double x : logits.v) m = std::max(m, x);
  double sum = 0;
  for (double x : logits.v) sum += std::exp(x - m);
  const double ce = m + std::log(sum) - logits.v[static_cast<size_t>(label)];
  std::vector<double> hs;
  hs.reserve(payloads.size());
  for (const SpikeTensor& s : payloads) hs.push_back(spike_entropy(s));
  return ce + entropy_regularizer(hs);
}

TrainLog train_codec_stage(ModelParams& mp, const Dataset& train, const Config& cfg,
                           const CodecTrainOpts& opts) {
  Rng init(split_mix64(cfg.seed ^ (0xC0DEC ^ opts.rng_salt)));
  Backbone backbone = Backbone::attach(mp, cfg, nullptr);  // must already exist
  Codec codec = Codec::attach(mp, opts.codec, &init);

  std::vector<ParamGroup*> trained = {&mp.group(ParamRole::kEncoder),
                                      &mp.group(ParamRole::kReconstructor),
                                      &mp.group(ParamRole::kConverter)};
  if (opts.train_backbone_too) {
    trained.push_back(&mp.group(ParamRole::kEdgeExtractor));
    trained.push_back(&mp.group(ParamRole::kTaskHead));
  }
  Adam opt({opts.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps}, trained);

  // With the backbone frozen the split features never change; compute once.
  Tensor all_features;
  if (!opts.train_backbone_too) {
    std::vector<int> ident(static_cast<size_t>(train.size()));
    for (int i = 0; i < train.size(); ++i) ident[static_cast<size_t>(i)] = i;
    all_features = backbone.extract_features(gather_images(train, ident, 0, train.size()));
  }

  Rng rng(split_mix64(cfg.seed ^ (0xC0DE7 ^ opts.rng_salt)));
  std::vector<int> order(static_cast<size_t>(train.size()));
  for (int i = 0; i < train.size(); ++i) order[static_cast<size_t>(i)] = i;

  const CodecConfig& cc = opts.codec;
  const int64_t payload_elems =
      static_cast<int64_t>(opts.batch) * numel(cc.payload_shape);

  TrainLog log;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    int batches = 0;
    for (int start = 0; start + opts.batch <= train.size(); start += opts.batch) {
      const int t = cc.min_steps + rng.uniform_int(cc.max_steps - cc.min_steps + 1);
      const double p = rng.uniform(opts.ber_lo, opts.ber_hi);

      Graph g;
      int f;
      if (opts.train_backbone_too) {
        const int x = g.input(gather_images(train, order, start, opts.batch));
        f = backbone.extract_features(g, x, true);
      } else {
        Tensor fb = Tensor::zeros({opts.batch, cc.feature_shape[0], cc.feature_shape[1],
                                   cc.feature_shape[2]});
        const int64_t chw = numel(cc.feature_shape);
        for (int i = 0; i < opts.batch; ++i) {
          const int src = order[static_cast<size_t>(start + i)];
          for (int64_t j = 0; j < chw; ++j)
            fb.v[static_cast<int64_t>(i) * chw + j] = all_features.v[src * chw + j];
        }
        f = g.input(std::move(fb));
      }

      // Encoder current is constant across steps of a session.
      const int current = codec.enc2.forward(g, g.relu(codec.enc1.forward(g, f, true)), true);
      GraphNeuron enc{cc.enc_neuron};
      GraphNeuron rec_if{cc.rec_if_neuron};
      GraphNeuron rec_ihf{cc.rec_ihf_neuron};

      std::vector<int> flat_steps;
      std::vector<int> entropies;
      for (int step = 0; step < t; ++step) {
        const int spikes = enc.step(g, current);
        entropies.push_back(g.binary_entropy_per_sample(spikes));
        std::vector<uint8_t> mask(static_cast<size_t>(payload_elems));
        for (auto& bit : mask) bit = rng.uniform() < p ? 1 : 0;
        const int received = g.bsc_flip(spikes, std::move(mask));
        const int rec_current = codec.rec.forward(g, received, true);
        const int fs = rec_if.step(g, rec_current);
        const auto [ihf_spikes, fm] = rec_ihf.step_with_membrane(g, rec_current);
        (void)ihf_spikes;  // membrane head carries the IHF contribution
        flat_steps.push_back(g.flatten_samples(fs));
        flat_steps.push_back(g.flatten_samples(fm));
      }

      const int padded = g.zero_pad_samples(g.concat_samples(flat_steps), cc.converter_in());
      const int f_prime = g.reshape(codec.converter.forward(g, padded, true),
                                    {opts.batch, cc.feature_shape[0], cc.feature_shape[1],
                                     cc.feature_shape[2]});
      const int logits = backbone.execute_task(g, f_prime, opts.train_backbone_too);
      const int ce = g.softmax_cross_entropy(logits, gather_labels(train, order, start, opts.batch));

      int hsum = entropies[0];
      for (size_t i = 1; i < entropies.size(); ++i) hsum = g.add(hsum, entropies[static_cast<size_t>(i)]);
      const int hmean = g.scale(hsum, 1.0 / t);
      const int dev = g.add_scalar(hmean, -1.0);
      const int reg = g.mean_all(g.mul(dev, dev));
      const int loss = g.add(ce, reg);

      const double loss_val = g.val(loss).item();
      if (!std::isfinite(loss_val)) throw DivergenceError("train_codec: non-finite loss");
      g.backward(loss);
      opt.step();
      epoch_loss += loss_val;
      ++batches;
    }
    log.epoch_loss.push_back(epoch_loss / batches);
  }
  return log;
}

TrainLog train_codec(ModelParams& mp, const Dataset& train, const Config& cfg) {
  CodecTrainOpts opts;
  opts.codec = CodecConfig::from(cfg);
  opts.epochs = cfg.codec_epochs;
  opts.batch = cfg.batch;
  opts.lr = cfg.lr;
  opts.ber_lo = cfg.ber_lo;
  opts.ber_hi = cfg.ber_hi;
  opts.rng_salt = 1;
  return train_codec_stage(mp, train, cfg, opts);
}

TrainLog joint_finetune(ModelParams& mp, const Dataset& train, const Config& cfg) {
  CodecTrainOpts opts;
  opts.codec = CodecConfig::from(cfg);
  opts.epochs = cfg.finetune_epochs;
  opts.batch = cfg.batch;
  opts.lr = cfg.finetune_lr;
  opts.ber_lo = cfg.ber_lo;
  opts.ber_hi = cfg.ber_hi;
  opts.train_backbone_too = true;
  opts.rng_salt = 2;
  return train_codec_stage(mp, train, cfg, opts);
}

TrainLog train_baseline_codec(ModelParams& baseline_mp, const Dataset& train, const Config& cfg) {
  CodecTrainOpts opts;
  opts.codec = CodecConfig::baseline_from(cfg);
  opts.epochs = cfg.baseline_codec_epochs;
  opts.batch = cfg.batch;
  opts.lr = cfg.lr;
  opts.ber_lo = 0.0;  // the separate-coding source codec trains noise-free
  opts.ber_hi = 0.0;
  opts.rng_salt = 3;
  return train_codec_stage(baseline_mp, train, cfg, opts);
}

}  // namespace snnsc
