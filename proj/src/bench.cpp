#include "snnsc/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

namespace snnsc {

namespace {

// Channel substream root for one evaluation seed. Sweep and protocol runs
// share it, so a protocol session that stops at t sees exactly the channel
// realization of the manual-rate cell at t (common random numbers).
uint64_t eval_channel_seed(const Config& cfg, uint64_t eval_seed) {
  return split_mix64(cfg.seed ^ split_mix64(0xE7A1F00DULL ^ eval_seed));
}

Tensor slice_row(const Tensor& batch, int i) {
  Shape s = batch.shape;
  s[0] = 1;
  const int64_t per = numel(s);
  Tensor out = Tensor::zeros(s);
  for (int64_t j = 0; j < per; ++j) out.v[j] = batch.v[static_cast<int64_t>(i) * per + j];
  return out;
}

// Per-sample BSC on a batched spike tensor: sample i uses substream
// (seed, session_base + i, round), bit j is counter j. Identical to
// transmitting each sample's tensor separately.
void flip_batch(SpikeTensor& s, double ber, uint64_t seed, uint64_t session_base,
                uint64_t round) {
  if (ber <= 0.0) return;
  const int n = s.shape[0];
  const int64_t per = s.size() / n;
  for (int i = 0; i < n; ++i) {
    for (int64_t j = 0; j < per; ++j) {
      const double u = u64_to_unit(counter_hash(seed, session_base + static_cast<uint64_t>(i),
                                                round, static_cast<uint64_t>(j)));
      if (u < ber) s.bits[static_cast<size_t>(i * per + j)] ^= 1u;
    }
  }
}

void parallel_for(int total, const std::function<void(int)>& fn) {
  const int threads = std::min(worker_threads(), total);
  if (threads <= 1) {
    for (int i = 0; i < total; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < total; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct CellRaw {
  std::vector<uint8_t> hits;
  std::vector<double> sims;
};

CellRaw eval_cell_raw(const SystemModel& m, const Dataset& test, double ber, int steps,
                      uint64_t eval_seed, int samples) {
  if (steps < m.codec.cfg.min_steps || steps > m.codec.cfg.max_steps)
    throw ConfigError("eval_cell: steps out of the codec's range");
  samples = std::min(samples, test.size());
  const ChannelModel ch = make_channel(ber);
  const uint64_t seed = eval_channel_seed(m.cfg, eval_seed);

  CellRaw raw;
  raw.hits.resize(static_cast<size_t>(samples));
  raw.sims.resize(static_cast<size_t>(samples));

  constexpr int kChunk = 256;
  std::vector<int> ident(static_cast<size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i) ident[static_cast<size_t>(i)] = i;

  for (int start = 0; start < samples; start += kChunk) {
    const int count = std::min(kChunk, samples - start);
    const Tensor f = m.backbone.extract_features(gather_images(test, ident, start, count));

    SpikeTensor prior_hat = m.simnet.extract_prior(f);
    flip_batch(prior_hat, ch.ber, seed, static_cast<uint64_t>(start), 0);

    CodecEvalSession session(m.codec, f);
    for (int step = 1; step <= steps; ++step) {
      SpikeTensor s = session.encode_step();
      flip_batch(s, ch.ber, seed, static_cast<uint64_t>(start), static_cast<uint64_t>(step));
      session.receive_step(s);
    }
    const Tensor f_prime = session.convert_current();
    const Tensor logits = m.backbone.execute_task(f_prime);
    const std::vector<double> sims = m.simnet.estimate_similarity(f_prime, prior_hat, ch.ber);
    for (int i = 0; i < count; ++i) {
      raw.hits[static_cast<size_t>(start + i)] =
          argmax_row(logits, i) == test.labels[static_cast<size_t>(start + i)] ? 1 : 0;
      raw.sims[static_cast<size_t>(start + i)] = sims[static_cast<size_t>(i)];
    }
  }
  return raw;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

ModelParams load_verified(const std::string& path, const Config& cfg) {
  if (!std::filesystem::exists(path))
    throw ConfigError("missing checkpoint " + path + " (run the earlier pipeline stages first)");
  ModelParams m = load_checkpoint(path);
  if (m.config_hash != cfg.model_hash())
    throw ConfigError("checkpoint " + path + " was built under a different [data]/[model] config");
  return m;
}

void require_groups(const ModelParams& m, std::initializer_list<ParamRole> roles,
                    const std::string& path) {
  for (ParamRole r : roles) {
    if (!m.has(r))
      throw ConfigError("checkpoint " + path + " lacks parameter group " + role_tag(r));
  }
}

std::string join_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

FILE* open_csv(const std::string& path) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw ConfigError("cannot write " + path);
  return f;
}

}  // namespace

int worker_threads() {
  const char* env = std::getenv("SNNSC_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 1 ? n : 1;
}

SystemModel SystemModel::from_params(const Config& cfg, ModelParams&& params) {
  SystemModel m;
  m.cfg = cfg;
  m.params = std::move(params);
  m.backbone = Backbone::attach(m.params, cfg, nullptr);
  m.codec = Codec::attach(m.params, CodecConfig::from(cfg), nullptr);
  m.simnet = SimNet::attach(m.params, cfg, nullptr);
  return m;
}

SystemModel SystemModel::load(const Config& cfg, const std::string& ckpt_path) {
  ModelParams p = load_verified(ckpt_path, cfg);
  require_groups(p,
                 {ParamRole::kEdgeExtractor, ParamRole::kTaskHead, ParamRole::kEncoder,
                  ParamRole::kReconstructor, ParamRole::kConverter, ParamRole::kPriorEncoder,
                  ParamRole::kSimilarityHead},
                 ckpt_path);
  return from_params(cfg, std::move(p));
}

namespace {

class CodecSessionAdapter final : public FeatureCodecSession {
 public:
  CodecSessionAdapter(const Codec& c, Tensor f) : session_(c, std::move(f)) {}
  SpikeTensor encode_step() override { return session_.encode_step(); }
  void receive_step(const SpikeTensor& s_hat) override { session_.receive_step(s_hat); }
  Tensor reconstruct_current() override { return session_.convert_current(); }

 private:
  CodecEvalSession session_;
};

}  // namespace

HarqModels SystemModel::harq_models() const {
  HarqModels models;
  models.open_session = [this](const Tensor& f) {
    return std::make_unique<CodecSessionAdapter>(codec, f);
  };
  models.extract_prior = [this](const Tensor& f) { return simnet.extract_prior(f); };
  models.estimate_similarity = [this](const Tensor& f_prime, const SpikeTensor& prior,
                                      double ber) {
    return simnet.estimate_similarity_one(f_prime, prior, ber);
  };
  models.task_head = [this](const Tensor& f_prime) { return backbone.execute_task(f_prime); };
  return models;
}

HarqConfig SystemModel::harq_config(double theta) const {
  HarqConfig hc;
  hc.min_steps = cfg.min_steps;
  hc.max_steps = cfg.max_steps;
  hc.ack_threshold = theta;
  hc.payload_shape = cfg.payload_shape();
  hc.prior_shape = cfg.prior_shape();
  hc.validate();
  return hc;
}

BaselineModel BaselineModel::from_params(const Config& cfg, ModelParams&& params) {
  BaselineModel m;
  m.cfg = cfg;
  m.params = std::move(params);
  m.backbone = Backbone::attach(m.params, cfg, nullptr);
  m.codec = Codec::attach(m.params, CodecConfig::baseline_from(cfg), nullptr);
  return m;
}

BaselineModel BaselineModel::load(const Config& cfg, const std::string& ckpt_path) {
  ModelParams p = load_verified(ckpt_path, cfg);
  require_groups(p,
                 {ParamRole::kEdgeExtractor, ParamRole::kTaskHead, ParamRole::kEncoder,
                  ParamRole::kReconstructor, ParamRole::kConverter},
                 ckpt_path);
  return from_params(cfg, std::move(p));
}

SweepGrid SweepGrid::from(const Config& cfg) {
  SweepGrid g;
  g.bers = cfg.sweep_bers;
  for (int t = cfg.min_steps; t <= cfg.max_steps; ++t) g.steps.push_back(t);
  for (int s = 1; s <= cfg.eval_seeds; ++s) g.eval_seeds.push_back(static_cast<uint64_t>(s));
  g.samples_per_cell = cfg.samples_per_cell;
  return g;
}

CellStats eval_cell(const SystemModel& m, const Dataset& test, double ber, int steps,
                    uint64_t eval_seed, int samples) {
  const CellRaw raw = eval_cell_raw(m, test, ber, steps, eval_seed, samples);
  CellStats out;
  out.n = static_cast<int64_t>(raw.hits.size());
  for (size_t i = 0; i < raw.hits.size(); ++i) {
    out.acc += raw.hits[i];
    out.sim += raw.sims[i];
  }
  out.acc /= static_cast<double>(out.n);
  out.sim /= static_cast<double>(out.n);
  return out;
}

std::vector<SurfacePoint> eval_sweep(const SystemModel& m, const Dataset& test,
                                     const SweepGrid& grid) {
  if (grid.bers.empty() || grid.steps.empty() || grid.eval_seeds.empty())
    throw ConfigError("eval_sweep: empty grid axis");
  const int cells = static_cast<int>(grid.bers.size() * grid.steps.size());
  std::vector<SurfacePoint> out(static_cast<size_t>(cells));
  parallel_for(cells, [&](int c) {
    const double ber = grid.bers[static_cast<size_t>(c) / grid.steps.size()];
    const int steps = grid.steps[static_cast<size_t>(c) % grid.steps.size()];
    double acc = 0, sim = 0;
    int64_t n = 0;
    for (uint64_t seed : grid.eval_seeds) {
      const CellRaw raw = eval_cell_raw(m, test, ber, steps, seed, grid.samples_per_cell);
      for (size_t i = 0; i < raw.hits.size(); ++i) {
        acc += raw.hits[i];
        sim += raw.sims[i];
      }
      n += static_cast<int64_t>(raw.hits.size());
    }
    SurfacePoint& p = out[static_cast<size_t>(c)];
    p.ber = ber;
    p.bandwidth = m.cfg.prior_bits + static_cast<int64_t>(steps) * m.cfg.step_bits();
    p.acc = acc / static_cast<double>(n);
    p.sim = sim / static_cast<double>(n);
    p.n = n;
  });
  return out;
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ShapeError("pearson: length mismatch");
  const size_t n = xs.size();
  if (n < 2) throw ConfigError("pearson: need at least two points");
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
    sxy += xs[i] * ys[i];
  }
  const double nn = static_cast<double>(n);
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  // Degenerate (numerically zero) variance: constant input up to rounding.
  if (vx <= 1e-12 * std::max(1.0, sxx) || vy <= 1e-12 * std::max(1.0, syy))
    throw NumericError("pearson: zero variance");
  return (sxy - sx * sy / nn) / std::sqrt(vx * vy);
}

std::vector<CorrRow> correlation_rows(const std::vector<SurfacePoint>& surface,
                                      const std::vector<double>& corr_bers) {
  std::vector<CorrRow> rows;
  for (double ber : corr_bers) {
    std::vector<std::pair<int64_t, std::pair<double, double>>> pts;
    for (const SurfacePoint& p : surface)
      if (p.ber == ber) pts.push_back({p.bandwidth, {p.sim, p.acc}});
    if (pts.size() < 2) throw ConfigError("correlation_rows: BER row missing from the surface");
    std::sort(pts.begin(), pts.end());
    std::vector<double> sims, accs;
    for (const auto& [bw, sa] : pts) {
      sims.push_back(sa.first);
      accs.push_back(sa.second);
    }
    rows.push_back({ber, pearson(sims, accs), static_cast<int>(pts.size())});
  }
  return rows;
}

double interpolate_surface(const std::vector<SurfacePoint>& surface, double ber,
                           double bandwidth) {
  std::vector<double> bers;
  std::vector<double> bws;
  for (const SurfacePoint& p : surface) {
    bers.push_back(p.ber);
    bws.push_back(static_cast<double>(p.bandwidth));
  }
  std::sort(bers.begin(), bers.end());
  bers.erase(std::unique(bers.begin(), bers.end()), bers.end());
  std::sort(bws.begin(), bws.end());
  bws.erase(std::unique(bws.begin(), bws.end()), bws.end());

  auto bracket = [](const std::vector<double>& axis, double q, const char* name) {
    if (q < axis.front() || q > axis.back())
      throw ConfigError(std::string("interpolate_surface: ") + name + " query outside the grid");
    size_t hi = 0;
    while (hi < axis.size() && axis[hi] < q) ++hi;
    const size_t lo = (hi == 0 || axis[hi] == q) ? hi : hi - 1;
    return std::pair<size_t, size_t>(lo, hi);
  };
  const auto [b0, b1] = bracket(bers, ber, "ber");
  const auto [w0, w1] = bracket(bws, bandwidth, "bandwidth");

  auto value_at = [&](double b, double w) {
    for (const SurfacePoint& p : surface)
      if (p.ber == b && static_cast<double>(p.bandwidth) == w) return p.acc;
    throw ConfigError("interpolate_surface: grid is not complete");
  };
  const double z00 = value_at(bers[b0], bws[w0]);
  const double z01 = value_at(bers[b0], bws[w1]);
  const double z10 = value_at(bers[b1], bws[w0]);
  const double z11 = value_at(bers[b1], bws[w1]);
  const double tb = bers[b1] == bers[b0] ? 0.0 : (ber - bers[b0]) / (bers[b1] - bers[b0]);
  const double tw = bws[w1] == bws[w0] ? 0.0 : (bandwidth - bws[w0]) / (bws[w1] - bws[w0]);
  const double z0 = z00 * (1 - tw) + z01 * tw;
  const double z1 = z10 * (1 - tw) + z11 * tw;
  return z0 * (1 - tb) + z1 * tb;
}

HarqCellStats harq_cell(const SystemModel& m, const Dataset& test, double theta, double ber,
                        uint64_t eval_seed, int samples, std::string* transcripts) {
  samples = std::min(samples, test.size());
  const ChannelModel ch = make_channel(ber);
  const HarqConfig hc = m.harq_config(theta);
  const HarqModels models = m.harq_models();
  const uint64_t seed = eval_channel_seed(m.cfg, eval_seed);

  std::vector<int> ident(static_cast<size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i) ident[static_cast<size_t>(i)] = i;
  const Tensor features = m.backbone.extract_features(gather_images(test, ident, 0, samples));

  HarqCellStats out;
  out.theta = theta;
  out.ber = ber;
  out.n = samples;
  for (int i = 0; i < samples; ++i) {
    const StreamKey key{seed, static_cast<uint64_t>(i), 0};
    const HarqSession s = run_session(slice_row(features, i), models, ch, hc, key);
    out.mean_bandwidth += static_cast<double>(bandwidth_of(s));
    out.mean_final_t += s.final_t;
    out.mean_score += s.final_score;
    out.acc += s.predicted_class == test.labels[static_cast<size_t>(i)] ? 1.0 : 0.0;
    if (transcripts) *transcripts += serialize_session(static_cast<uint64_t>(i), s);
  }
  out.mean_bandwidth /= samples;
  out.mean_final_t /= samples;
  out.mean_score /= samples;
  out.acc /= samples;
  return out;
}

std::vector<HarqCellStats> run_harq_cells(const SystemModel& m, const Dataset& test,
                                          const std::vector<double>& thetas,
                                          const std::vector<double>& bers,
                                          const std::vector<uint64_t>& seeds, int samples) {
  const int cells = static_cast<int>(thetas.size() * bers.size());
  std::vector<HarqCellStats> out(static_cast<size_t>(cells));
  parallel_for(cells, [&](int c) {
    const double theta = thetas[static_cast<size_t>(c) / bers.size()];
    const double ber = bers[static_cast<size_t>(c) % bers.size()];
    HarqCellStats pooled;
    pooled.theta = theta;
    pooled.ber = ber;
    for (uint64_t seed : seeds) {
      const HarqCellStats one = harq_cell(m, test, theta, ber, seed, samples);
      pooled.mean_bandwidth += one.mean_bandwidth * static_cast<double>(one.n);
      pooled.mean_final_t += one.mean_final_t * static_cast<double>(one.n);
      pooled.mean_score += one.mean_score * static_cast<double>(one.n);
      pooled.acc += one.acc * static_cast<double>(one.n);
      pooled.n += one.n;
    }
    pooled.mean_bandwidth /= static_cast<double>(pooled.n);
    pooled.mean_final_t /= static_cast<double>(pooled.n);
    pooled.mean_score /= static_cast<double>(pooled.n);
    pooled.acc /= static_cast<double>(pooled.n);
    out[static_cast<size_t>(c)] = pooled;
  });
  return out;
}

std::vector<double> calibrate_thetas(const SystemModel& m, const Dataset& test) {
  std::vector<double> scores;
  for (double ber : m.cfg.sweep_bers) {
    const CellRaw raw = eval_cell_raw(m, test, ber, m.cfg.min_steps, 0, m.cfg.calib_samples);
    scores.insert(scores.end(), raw.sims.begin(), raw.sims.end());
  }
  std::sort(scores.begin(), scores.end());
  std::vector<double> thetas;
  for (double q : m.cfg.theta_quantiles) {
    double t = quantile_sorted(scores, q);
    t = std::min(0.999, std::max(-0.999, t));
    thetas.push_back(t);
  }
  return thetas;
}

std::vector<GapRow> gap_table(const std::vector<HarqCellStats>& cells,
                              const std::vector<SurfacePoint>& surface) {
  std::vector<GapRow> rows;
  for (const HarqCellStats& c : cells) {
    GapRow r;
    r.theta = c.theta;
    r.ber = c.ber;
    r.harq_acc = c.acc;
    r.mean_bandwidth = c.mean_bandwidth;
    r.interp_acc = interpolate_surface(surface, c.ber, c.mean_bandwidth);
    r.gap_points = std::fabs(r.harq_acc - r.interp_acc) * 100.0;
    rows.push_back(r);
  }
  return rows;
}

BaselineCellStats baseline_cell(const BaselineModel& m, const Dataset& test, double ber,
                                uint64_t eval_seed, int samples) {
  samples = std::min(samples, test.size());
  const ChannelModel ch = make_channel(ber);
  BaselineConfig bc;
  bc.scheme = fec_from_string(m.cfg.fec_scheme);
  bc.fixed_steps = m.cfg.baseline_steps;
  bc.bit_budget = m.cfg.bit_budget;
  const uint64_t seed = split_mix64(m.cfg.seed ^ split_mix64(0xBA5E11FEULL ^ eval_seed));

  std::vector<int> ident(static_cast<size_t>(test.size()));
  for (int i = 0; i < test.size(); ++i) ident[static_cast<size_t>(i)] = i;
  const Tensor features = m.backbone.extract_features(gather_images(test, ident, 0, samples));
  const auto task = [&](const Tensor& f) { return m.backbone.execute_task(f); };

  BaselineCellStats out;
  out.ber = ber;
  out.n = samples;
  for (int i = 0; i < samples; ++i) {
    const StreamKey key{seed, static_cast<uint64_t>(i), 0};
    const BaselineSession s =
        run_baseline_session(slice_row(features, i), m.codec, task, ch, bc, key);
    out.mean_bits += static_cast<double>(s.bits_used);
    out.success_rate += s.success ? 1.0 : 0.0;
    out.acc += s.predicted_class == test.labels[static_cast<size_t>(i)] ? 1.0 : 0.0;
  }
  out.mean_bits /= samples;
  out.success_rate /= samples;
  out.acc /= samples;
  return out;
}

std::vector<BaselineCellStats> run_baseline_cells(const BaselineModel& m, const Dataset& test,
                                                  const std::vector<double>& bers,
                                                  const std::vector<uint64_t>& seeds,
                                                  int samples) {
  const int cells = static_cast<int>(bers.size());
  std::vector<BaselineCellStats> out(static_cast<size_t>(cells));
  parallel_for(cells, [&](int c) {
    BaselineCellStats pooled;
    pooled.ber = bers[static_cast<size_t>(c)];
    for (uint64_t seed : seeds) {
      const BaselineCellStats one = baseline_cell(m, test, pooled.ber, seed, samples);
      pooled.acc += one.acc * static_cast<double>(one.n);
      pooled.mean_bits += one.mean_bits * static_cast<double>(one.n);
      pooled.success_rate += one.success_rate * static_cast<double>(one.n);
      pooled.n += one.n;
    }
    pooled.acc /= static_cast<double>(pooled.n);
    pooled.mean_bits /= static_cast<double>(pooled.n);
    pooled.success_rate /= static_cast<double>(pooled.n);
    out[static_cast<size_t>(c)] = pooled;
  });
  return out;
}

// ---- pipeline -------------------------------------------------------------

std::string backbone_ckpt_path(const Config& cfg) { return join_path(cfg.out_dir, "backbone.ckpt"); }
std::string codec_ckpt_path(const Config& cfg) { return join_path(cfg.out_dir, "codec.ckpt"); }
std::string finetune_ckpt_path(const Config& cfg) { return join_path(cfg.out_dir, "finetune.ckpt"); }
std::string simnet_ckpt_path(const Config& cfg) { return join_path(cfg.out_dir, "simnet.ckpt"); }
std::string baseline_ckpt_path(const Config& cfg) { return join_path(cfg.out_dir, "baseline_codec.ckpt"); }

TrainLog stage_train_backbone(const Config& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  ModelParams mp;
  mp.config_hash = cfg.model_hash();
  const Dataset train = make_train_split(cfg);
  const Dataset test = make_test_split(cfg);
  TrainLog log = train_backbone(mp, train, test, cfg);
  save_checkpoint(mp, backbone_ckpt_path(cfg));
  return log;
}

TrainLog stage_train_codec(const Config& cfg) {
  ModelParams mp = load_verified(backbone_ckpt_path(cfg), cfg);
  require_groups(mp, {ParamRole::kEdgeExtractor, ParamRole::kTaskHead}, backbone_ckpt_path(cfg));
  const Dataset train = make_train_split(cfg);
  TrainLog log = train_codec(mp, train, cfg);
  save_checkpoint(mp, codec_ckpt_path(cfg));
  return log;
}

TrainLog stage_finetune(const Config& cfg) {
  ModelParams mp = load_verified(codec_ckpt_path(cfg), cfg);
  require_groups(mp, {ParamRole::kEncoder, ParamRole::kReconstructor, ParamRole::kConverter},
                 codec_ckpt_path(cfg));
  const Dataset train = make_train_split(cfg);
  TrainLog log = joint_finetune(mp, train, cfg);
  save_checkpoint(mp, finetune_ckpt_path(cfg));
  return log;
}

TrainLog stage_train_simnet(const Config& cfg) {
  ModelParams mp = load_verified(finetune_ckpt_path(cfg), cfg);
  require_groups(mp, {ParamRole::kEncoder, ParamRole::kReconstructor, ParamRole::kConverter},
                 finetune_ckpt_path(cfg));
  const Dataset train = make_train_split(cfg);
  TrainLog log = train_simnet(mp, train, cfg);
  save_checkpoint(mp, simnet_ckpt_path(cfg));
  return log;
}

TrainLog stage_train_baseline(const Config& cfg) {
  ModelParams finetuned = load_verified(finetune_ckpt_path(cfg), cfg);
  ModelParams bp;
  bp.config_hash = cfg.model_hash();
  bp.groups[ParamRole::kEdgeExtractor] = finetuned.group(ParamRole::kEdgeExtractor);
  bp.groups[ParamRole::kTaskHead] = finetuned.group(ParamRole::kTaskHead);
  const Dataset train = make_train_split(cfg);
  TrainLog log = train_baseline_codec(bp, train, cfg);
  save_checkpoint(bp, baseline_ckpt_path(cfg));
  return log;
}

void run_pipeline(const Config& cfg) {
  stage_train_backbone(cfg);
  stage_train_codec(cfg);
  stage_finetune(cfg);
  stage_train_simnet(cfg);
}

EvalOutputs run_full_eval(const Config& cfg) {
  const SystemModel model = SystemModel::load(cfg, simnet_ckpt_path(cfg));
  const Dataset test = make_test_split(cfg);
  const SweepGrid grid = SweepGrid::from(cfg);

  EvalOutputs ev;
  ev.surface = eval_sweep(model, test, grid);
  ev.correlations = correlation_rows(ev.surface, cfg.corr_bers);
  ev.thetas_used = cfg.thetas.empty() ? calibrate_thetas(model, test) : cfg.thetas;
  ev.harq = run_harq_cells(model, test, ev.thetas_used, cfg.gap_bers, grid.eval_seeds,
                           grid.samples_per_cell);
  ev.gaps = gap_table(ev.harq, ev.surface);

  if (!std::filesystem::exists(baseline_ckpt_path(cfg))) stage_train_baseline(cfg);
  const BaselineModel baseline = BaselineModel::load(cfg, baseline_ckpt_path(cfg));
  ev.baseline = run_baseline_cells(baseline, test, cfg.baseline_bers, grid.eval_seeds,
                                   grid.samples_per_cell);
  return ev;
}

void write_report(const std::string& out_dir, const EvalOutputs& ev) {
  std::filesystem::create_directories(out_dir);

  FILE* f = open_csv(join_path(out_dir, "surface.csv"));
  std::fprintf(f, "ber,bandwidth,acc,sim,n\n");
  for (const SurfacePoint& p : ev.surface)
    std::fprintf(f, "%.6f,%lld,%.6f,%.6f,%lld\n", p.ber, static_cast<long long>(p.bandwidth),
                 p.acc, p.sim, static_cast<long long>(p.n));
  std::fclose(f);

  f = open_csv(join_path(out_dir, "correlations.csv"));
  std::fprintf(f, "ber,pearson_r,n_points\n");
  for (const CorrRow& r : ev.correlations) std::fprintf(f, "%.6f,%.6f,%d\n", r.ber, r.r, r.n);
  std::fclose(f);

  f = open_csv(join_path(out_dir, "harq.csv"));
  std::fprintf(f, "theta,ber,mean_bandwidth,mean_final_t,acc,mean_score,n\n");
  for (const HarqCellStats& c : ev.harq)
    std::fprintf(f, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%lld\n", c.theta, c.ber, c.mean_bandwidth,
                 c.mean_final_t, c.acc, c.mean_score, static_cast<long long>(c.n));
  std::fclose(f);

  f = open_csv(join_path(out_dir, "gaps.csv"));
  std::fprintf(f, "theta,ber,harq_acc,interp_acc,gap_points,mean_bandwidth\n");
  for (const GapRow& r : ev.gaps)
    std::fprintf(f, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.theta, r.ber, r.harq_acc, r.interp_acc,
                 r.gap_points, r.mean_bandwidth);
  std::fclose(f);

  f = open_csv(join_path(out_dir, "baseline.csv"));
  std::fprintf(f, "ber,acc,mean_bits,success_rate,n\n");
  for (const BaselineCellStats& c : ev.baseline)
    std::fprintf(f, "%.6f,%.6f,%.6f,%.6f,%lld\n", c.ber, c.acc, c.mean_bits, c.success_rate,
                 static_cast<long long>(c.n));
  std::fclose(f);
}

}  // namespace snnsc
