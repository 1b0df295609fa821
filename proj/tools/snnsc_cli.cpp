// Experiment runner: multi-step training pipeline, manual-rate sweeps,
// adaptive-retransmission runs, separate-coding baseline, and CSV reporting.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "snnsc/bench.hpp"

namespace {

using namespace snnsc;

void print_train_log(const char* stage, const TrainLog& log) {
  std::printf("[%s] epochs=%zu", stage, log.epoch_loss.size());
  if (!log.epoch_loss.empty())
    std::printf(" first_loss=%.6f last_loss=%.6f", log.epoch_loss.front(), log.epoch_loss.back());
  std::printf(" metric=%.6f\n", log.final_metric);
}

void write_dataset_csv(const Dataset& d, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + path);
  os << "label";
  const int64_t dim = numel(d.images.shape) / d.size();
  for (int64_t j = 0; j < dim; ++j) os << ",x" << j;
  os << "\n";
  char buf[32];
  for (int i = 0; i < d.size(); ++i) {
    os << d.labels[static_cast<size_t>(i)];
    for (int64_t j = 0; j < dim; ++j) {
      std::snprintf(buf, sizeof(buf), ",%.9g", d.images.v[static_cast<int64_t>(i) * dim + j]);
      os << buf;
    }
    os << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"spiking semantic-communication simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::string config_path;
  std::string out_dir_override;
  std::vector<std::string> overrides;
  bool dump_config = false;
  app.add_option("--config", config_path, "configuration file (sectioned key=value)");
  app.add_option("--set", overrides, "override a key, e.g. --set model.min_steps=4")
      ->take_all();
  app.add_option("--out", out_dir_override, "output directory (overrides io.out_dir)");
  app.add_flag("--dump-config", dump_config, "print the effective configuration and continue");

  auto* gen = app.add_subcommand("gen-data", "write the synthetic dataset as CSV");
  uint64_t gen_seed = 0;
  int gen_train = 0, gen_test = 0;
  gen->add_option("--seed", gen_seed, "dataset seed (overrides data.seed)");
  gen->add_option("--train-samples", gen_train, "training split size");
  gen->add_option("--test-samples", gen_test, "test split size");

  app.add_subcommand("train-backbone", "train the split classifier");
  app.add_subcommand("train-codec", "train the multi-rate codec (backbone frozen)");
  app.add_subcommand("finetune", "jointly fine-tune backbone and codec");
  app.add_subcommand("train-simnet", "train the similarity network (rest frozen)");
  app.add_subcommand("pipeline", "run all four training stages in order");
  app.add_subcommand("sweep", "manual-rate sweep -> surface.csv, correlations.csv");

  auto* harq_cmd = app.add_subcommand("harq", "adaptive sessions -> harq.csv");
  bool harq_transcripts = false;
  harq_cmd->add_flag("--transcripts", harq_transcripts,
                     "also write per-round transcripts to harq_transcripts.log");

  app.add_subcommand("baseline", "separate-coding baseline -> baseline.csv");
  app.add_subcommand("gaps", "bandwidth-matched comparison -> gaps.csv (plus inputs)");
  app.add_subcommand("report", "everything after training -> all five CSV files");

  CLI11_PARSE(app, argc, argv);

  Config cfg = config_path.empty() ? Config::defaults() : Config::from_file(config_path);
  for (const std::string& kv : overrides) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;
  cfg.validate();
  if (dump_config) std::fputs(cfg.dump().c_str(), stdout);

  if (gen->parsed()) {
    if (gen->count("--seed")) cfg.seed = gen_seed;
    if (gen->count("--train-samples")) cfg.train_samples = gen_train;
    if (gen->count("--test-samples")) cfg.test_samples = gen_test;
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const Dataset train = make_train_split(cfg);
    const Dataset test = make_test_split(cfg);
    write_dataset_csv(train, cfg.out_dir + "/dataset_train.csv");
    write_dataset_csv(test, cfg.out_dir + "/dataset_test.csv");
    std::printf("[gen-data] train=%d test=%d classes=%d -> %s\n", train.size(), test.size(),
                cfg.classes, cfg.out_dir.c_str());
    return 0;
  }
  if (app.got_subcommand("train-backbone")) {
    print_train_log("train-backbone", stage_train_backbone(cfg));
    return 0;
  }
  if (app.got_subcommand("train-codec")) {
    print_train_log("train-codec", stage_train_codec(cfg));
    return 0;
  }
  if (app.got_subcommand("finetune")) {
    print_train_log("finetune", stage_finetune(cfg));
    return 0;
  }
  if (app.got_subcommand("train-simnet")) {
    print_train_log("train-simnet", stage_train_simnet(cfg));
    return 0;
  }
  if (app.got_subcommand("pipeline")) {
    print_train_log("train-backbone", stage_train_backbone(cfg));
    print_train_log("train-codec", stage_train_codec(cfg));
    print_train_log("finetune", stage_finetune(cfg));
    print_train_log("train-simnet", stage_train_simnet(cfg));
    return 0;
  }

  // Evaluation subcommands share the full evaluation pass so their outputs
  // stay mutually consistent.
  if (app.got_subcommand("sweep") || harq_cmd->parsed() || app.got_subcommand("baseline") ||
      app.got_subcommand("gaps") || app.got_subcommand("report")) {
    const EvalOutputs ev = run_full_eval(cfg);
    write_report(cfg.out_dir, ev);
    if (harq_cmd->parsed() && harq_transcripts) {
      const SystemModel model = SystemModel::load(cfg, simnet_ckpt_path(cfg));
      const Dataset test = make_test_split(cfg);
      std::string all;
      for (double theta : ev.thetas_used)
        for (double ber : cfg.gap_bers) {
          std::string t;
          harq_cell(model, test, theta, ber, 1, std::min(cfg.samples_per_cell, 64), &t);
          all += t;
        }
      std::ofstream os(cfg.out_dir + "/harq_transcripts.log", std::ios::trunc);
      os << all;
    }
    std::printf("[eval] thetas =");
    for (double t : ev.thetas_used) std::printf(" %.4f", t);
    std::printf("\n[eval] wrote surface/correlations/harq/gaps/baseline CSV files to %s\n",
                cfg.out_dir.c_str());
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const snnsc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const snnsc::DivergenceError& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
