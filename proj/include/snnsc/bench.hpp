#pragma once

#include <string>
#include <vector>

#include "snnsc/baseline.hpp"
#include "snnsc/harq.hpp"
#include "snnsc/simnet.hpp"

namespace snnsc {

// A trained system: parameters plus the wrappers bound to them. Move-only;
// the wrappers hold pointers into `params`.
struct SystemModel {
  Config cfg;
  ModelParams params;
  Backbone backbone;
  Codec codec;
  SimNet simnet;

  SystemModel() = default;
  SystemModel(const SystemModel&) = delete;
  SystemModel& operator=(const SystemModel&) = delete;
  SystemModel(SystemModel&&) = default;
  SystemModel& operator=(SystemModel&&) = default;

  static SystemModel from_params(const Config& cfg, ModelParams&& params);
  static SystemModel load(const Config& cfg, const std::string& ckpt_path);

  // Production wiring of the protocol engine onto this model.
  HarqModels harq_models() const;
  HarqConfig harq_config(double theta) const;
};

// Fixed-rate codec + shared backbone for the separate-coding baseline.
struct BaselineModel {
  Config cfg;
  ModelParams params;
  Backbone backbone;
  Codec codec;

  BaselineModel() = default;
  BaselineModel(const BaselineModel&) = delete;
  BaselineModel& operator=(const BaselineModel&) = delete;
  BaselineModel(BaselineModel&&) = default;
  BaselineModel& operator=(BaselineModel&&) = default;

  static BaselineModel from_params(const Config& cfg, ModelParams&& params);
  static BaselineModel load(const Config& cfg, const std::string& ckpt_path);
};

struct SweepGrid {
  std::vector<double> bers;
  std::vector<int> steps;
  std::vector<uint64_t> eval_seeds;
  int samples_per_cell = 0;

  static SweepGrid from(const Config& cfg);
};

struct SurfacePoint {
  double ber = 0;
  int64_t bandwidth = 0;
  double acc = 0;
  double sim = 0;
  int64_t n = 0;
};

struct CellStats {
  double acc = 0;
  double sim = 0;
  int64_t n = 0;
};

// Manual-rate evaluation of one (ber, steps) cell under one evaluation seed.
// Channel substreams are keyed per sample, so results are independent of
// batching and replay exactly.
CellStats eval_cell(const SystemModel& m, const Dataset& test, double ber, int steps,
                    uint64_t eval_seed, int samples);

std::vector<SurfacePoint> eval_sweep(const SystemModel& m, const Dataset& test,
                                     const SweepGrid& grid);

// Pearson correlation. Requires n >= 2 and nonzero variance in both inputs.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct CorrRow {
  double ber = 0;
  double r = 0;
  int n = 0;
};
std::vector<CorrRow> correlation_rows(const std::vector<SurfacePoint>& surface,
                                      const std::vector<double>& corr_bers);

// Bilinear interpolation over the (ber, bandwidth) grid; queries must lie
// within the grid's hull (boundaries included).
double interpolate_surface(const std::vector<SurfacePoint>& surface, double ber,
                           double bandwidth);

struct HarqCellStats {
  double theta = 0;
  double ber = 0;
  double mean_bandwidth = 0;
  double mean_final_t = 0;
  double acc = 0;
  double mean_score = 0;
  int64_t n = 0;
};

HarqCellStats harq_cell(const SystemModel& m, const Dataset& test, double theta, double ber,
                        uint64_t eval_seed, int samples, std::string* transcripts = nullptr);
std::vector<HarqCellStats> run_harq_cells(const SystemModel& m, const Dataset& test,
                                          const std::vector<double>& thetas,
                                          const std::vector<double>& bers,
                                          const std::vector<uint64_t>& seeds, int samples);

// Thresholds as quantiles of the initial-round estimated-similarity scores
// pooled over the sweep BER grid (the toy analogue of hand-picked thresholds).
std::vector<double> calibrate_thetas(const SystemModel& m, const Dataset& test);

struct GapRow {
  double theta = 0;
  double ber = 0;
  double harq_acc = 0;
  double interp_acc = 0;
  double gap_points = 0;  // |harq - interpolated|, percentage points
  double mean_bandwidth = 0;
};
std::vector<GapRow> gap_table(const std::vector<HarqCellStats>& cells,
                              const std::vector<SurfacePoint>& surface);

struct BaselineCellStats {
  double ber = 0;
  double acc = 0;
  double mean_bits = 0;
  double success_rate = 0;
  int64_t n = 0;
};
BaselineCellStats baseline_cell(const BaselineModel& m, const Dataset& test, double ber,
                                uint64_t eval_seed, int samples);
std::vector<BaselineCellStats> run_baseline_cells(const BaselineModel& m, const Dataset& test,
                                                  const std::vector<double>& bers,
                                                  const std::vector<uint64_t>& seeds, int samples);

// ---- pipeline stages & artifacts -----------------------------------------

std::string backbone_ckpt_path(const Config& cfg);
std::string codec_ckpt_path(const Config& cfg);
std::string finetune_ckpt_path(const Config& cfg);
std::string simnet_ckpt_path(const Config& cfg);
std::string baseline_ckpt_path(const Config& cfg);

TrainLog stage_train_backbone(const Config& cfg);
TrainLog stage_train_codec(const Config& cfg);
TrainLog stage_finetune(const Config& cfg);
TrainLog stage_train_simnet(const Config& cfg);
TrainLog stage_train_baseline(const Config& cfg);

// backbone -> codec (backbone frozen) -> joint fine-tune -> similarity net.
void run_pipeline(const Config& cfg);

struct EvalOutputs {
  std::vector<SurfacePoint> surface;
  std::vector<CorrRow> correlations;
  std::vector<double> thetas_used;
  std::vector<HarqCellStats> harq;
  std::vector<GapRow> gaps;
  std::vector<BaselineCellStats> baseline;
};

EvalOutputs run_full_eval(const Config& cfg);

// Writes surface.csv, correlations.csv, harq.csv, gaps.csv, baseline.csv
// into out_dir (created if missing). Byte-deterministic for a fixed config.
void write_report(const std::string& out_dir, const EvalOutputs& ev);

// Number of worker threads for sweep cells; reads SNNSC_THREADS (default 1).
int worker_threads();

}  // namespace snnsc
