#include "snnsc/simnet.hpp"

#include <cmath>

#include "snnsc/adam.hpp"

namespace snnsc {

SimNet SimNet::attach(ModelParams& mp, const Config& cfg, Rng* init) {
  SimNet s;
  s.prior_bits = cfg.prior_bits;
  s.feature_shape = cfg.feature_shape();
  ParamGroup& pe = mp.group(ParamRole::kPriorEncoder);
  ParamGroup& sh = mp.group(ParamRole::kSimilarityHead);
  s.se1 = Conv2d::attach(pe, "se1", cfg.split_channels, cfg.prior_bits, 3, 1, 1, init);
  s.se2 = Conv2d::attach(pe, "se2", cfg.prior_bits, cfg.prior_bits, 1, 1, 0, init);
  const int in_dim = static_cast<int>(numel(s.feature_shape)) + cfg.prior_bits + 1;
  s.sd1 = Linear::attach(sh, "sd1", in_dim, cfg.sim_hidden, init);
  s.sd2 = Linear::attach(sh, "sd2", cfg.sim_hidden, 1, init);
  return s;
}

namespace {

Tensor relu(Tensor t) {
  for (double& x : t.v)
    if (x < 0) x = 0;
  return t;
}

Tensor pool_spatial(const Tensor& t) {
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

SpikeTensor SimNet::extract_prior(const Tensor& f) const {
  const Shape want = {f.shape.empty() ? 0 : f.shape[0], feature_shape[0], feature_shape[1],
                      feature_shape[2]};
  require_shape("extract_prior", f, want);
  Tensor pooled = pool_spatial(se2.forward(relu(se1.forward(f))));
  require_finite("extract_prior", pooled);
  const int n = f.shape[0];
  SpikeTensor bits = SpikeTensor::zeros({n, prior_bits, 1, 1});
  for (int64_t i = 0; i < pooled.size(); ++i)
    bits.bits[static_cast<size_t>(i)] = pooled.v[i] > 0.0 ? 1 : 0;
  return bits;
}

std::vector<double> SimNet::estimate_similarity(const Tensor& f_prime, const SpikeTensor& k_hat,
                                                double ber) const {
  const int n = f_prime.shape.empty() ? 0 : f_prime.shape[0];
  const Shape want = {n, feature_shape[0], feature_shape[1], feature_shape[2]};
  require_shape("estimate_similarity", f_prime, want);
  if (k_hat.shape != Shape{n, prior_bits, 1, 1})
    throw ShapeError("estimate_similarity: prior shape " + shape_str(k_hat.shape) + " vs " +
                     shape_str({n, prior_bits, 1, 1}));
  const int fdim = static_cast<int>(numel(feature_shape));
  Tensor x = Tensor::zeros({n, fdim + prior_bits + 1});
  for (int i = 0; i < n; ++i) {
    double* row = x.data() + static_cast<int64_t>(i) * (fdim + prior_bits + 1);
    const double* fp = f_prime.data() + static_cast<int64_t>(i) * fdim;
    for (int k = 0; k < fdim; ++k) row[k] = fp[k];
    for (int k = 0; k < prior_bits; ++k)
      row[fdim + k] = k_hat.bits[static_cast<size_t>(i * prior_bits + k)] ? 1.0 : 0.0;
    row[fdim + prior_bits] = ber;
  }
  Tensor out = sd2.forward(relu(sd1.forward(x)));
  require_finite("estimate_similarity", out);
  std::vector<double> scores(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double v = out.v[static_cast<size_t>(i)];
    scores[static_cast<size_t>(i)] = v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v);
  }
  return scores;
}

double SimNet::estimate_similarity_one(const Tensor& f_prime, const SpikeTensor& k_hat,
                                       double ber) const {
  return estimate_similarity(f_prime, k_hat, ber)[0];
}

std::vector<double> true_similarity(const Backbone& b, const Tensor& f, const Tensor& f_prime) {
  require_same_shape("true_similarity", f, f_prime);
  const Tensor u = b.execute_task(f);
  const Tensor v = b.execute_task(f_prime);
  const int n = u.shape[0], k = u.shape[1];
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double* ui = u.data() + static_cast<int64_t>(i) * k;
    const double* vi = v.data() + static_cast<int64_t>(i) * k;
    double dot = 0, nu = 0, nv = 0;
    for (int j = 0; j < k; ++j) {
      dot += ui[j] * vi[j];
      nu += ui[j] * ui[j];
      nv += vi[j] * vi[j];
    }
    if (nu == 0.0 || nv == 0.0)
      throw NumericError("true_similarity: zero-norm task output (degenerate head)");
    out[static_cast<size_t>(i)] = dot / (std::sqrt(nu) * std::sqrt(nv));
  }
  return out;
}

double true_similarity_one(const Backbone& b, const Tensor& f, const Tensor& f_prime) {
  return true_similarity(b, f, f_prime)[0];
}

TrainLog train_simnet(ModelParams& mp, const Dataset& train, const Config& cfg) {
  Rng init(split_mix64(cfg.seed ^ 0x51A7));
  Backbone backbone = Backbone::attach(mp, cfg, nullptr);
  Codec codec = Codec::attach(mp, CodecConfig::from(cfg), nullptr);
  SimNet sim = SimNet::attach(mp, cfg, &init);
  Adam opt({cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps},
           {&mp.group(ParamRole::kPriorEncoder), &mp.group(ParamRole::kSimilarityHead)});

  std::vector<int> ident(static_cast<size_t>(train.size()));
  for (int i = 0; i < train.size(); ++i) ident[static_cast<size_t>(i)] = i;
  const Tensor all_features = backbone.extract_features(
      gather_images(train, ident, 0, train.size()));
  const int64_t fdim = numel(codec.cfg.feature_shape);

  Rng rng(split_mix64(cfg.seed ^ 0x51A8));
  std::vector<int> order = ident;

  const CodecConfig& cc = codec.cfg;
  TrainLog log;
  for (int epoch = 0; epoch < cfg.simnet_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0;
    int batches = 0;
    for (int start = 0; start + cfg.batch <= train.size(); start += cfg.batch) {
      const int t = cc.min_steps + rng.uniform_int(cc.max_steps - cc.min_steps + 1);
      const double p = rng.uniform(cfg.ber_lo, cfg.ber_hi);

      Tensor f = Tensor::zeros({cfg.batch, cc.feature_shape[0], cc.feature_shape[1],
                                cc.feature_shape[2]});
      for (int i = 0; i < cfg.batch; ++i) {
        const int src = order[static_cast<size_t>(start + i)];
        for (int64_t j = 0; j < fdim; ++j)
          f.v[static_cast<int64_t>(i) * fdim + j] = all_features.v[src * fdim + j];
      }

      // Reconstruction through the frozen codec at (p, t), outside the tape.
      CodecEvalSession session(codec, f);
      for (int step = 0; step < t; ++step) {
        SpikeTensor s = session.encode_step();
        for (auto& bit : s.bits)
          if (rng.uniform() < p) bit ^= 1u;
        session.receive_step(s);
      }
      const Tensor f_prime = session.convert_current();
      const std::vector<double> labels = true_similarity(backbone, f, f_prime);

      Graph g;
      const int fin = g.input(f);
      const int pooled = g.spatial_mean(
          sim.se2.forward(g, g.relu(sim.se1.forward(g, fin, true)), true));
      const int prior = g.quantize_sign(pooled);
      std::vector<uint8_t> mask(static_cast<size_t>(cfg.batch) * cfg.prior_bits);
      for (auto& bit : mask) bit = rng.uniform() < p ? 1 : 0;
      const int prior_rx = g.bsc_flip(prior, std::move(mask));

      const int fp_in = g.flatten_samples(g.input(f_prime));
      const int p_in = g.input(Tensor::full({cfg.batch, 1}, p));
      const int x = g.concat_samples({fp_in, prior_rx, p_in});
      // Trained unclamped: the inference-time clamp would zero the gradient
      // for any sample whose raw score drifts outside [-1, 1] and strand it
      // there. Labels are cosines, so the regression target is in range.
      const int score = sim.sd2.forward(g, g.relu(sim.sd1.forward(g, x, true)), true);
      Tensor label_col = Tensor::zeros({cfg.batch, 1});
      for (int i = 0; i < cfg.batch; ++i) label_col.v[static_cast<size_t>(i)] = labels[static_cast<size_t>(i)];
      const int loss = g.squared_error(score, g.input(std::move(label_col)));

      const double loss_val = g.val(loss).item();
      if (!std::isfinite(loss_val)) throw DivergenceError("train_simnet: non-finite loss");
      g.backward(loss);
      opt.step();
      epoch_loss += loss_val;
      ++batches;
    }
    log.epoch_loss.push_back(epoch_loss / batches);
  }
  log.final_metric = log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back();
  return log;
}

}  // namespace snnsc
