// mtml_rsc: train, evaluate, sweep and plot the multi-task relay system.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mtml/checkpoint.hpp"
#include "mtml/config.hpp"
#include "mtml/errors.hpp"
#include "mtml/experiment.hpp"
#include "mtml/plots.hpp"
#include "mtml/selftest.hpp"
#include "mtml/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "Experiment config file (key = value)");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--out", args.out, "Output directory")->capture_default_str();
}

mtml::ExperimentConfig resolve_config(const CommonArgs& args) {
  auto cfg = args.config.empty() ? mtml::ExperimentConfig{} : mtml::load_config(args.config);
  if (args.seed) cfg.seed = *args.seed;
  mtml::validate(cfg);
  return cfg;
}

std::vector<mtml::Scheme> parse_schemes(const std::string& s) {
  if (s == "both") return {mtml::Scheme::kMtml, mtml::Scheme::kBaseline};
  return {mtml::parse_scheme(s)};
}

std::vector<double> parse_points(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  for (std::string cell; std::getline(in, cell, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw mtml::Error(fmt::format("bad point '{}' in --points", cell));
    }
  }
  return out;
}

std::string run_metadata(const mtml::ExperimentConfig& cfg, std::string_view what) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
  return fmt::format("run {} {} dataset={} fading={} snr_db={} d_sr={} seed={} epochs={},{},{}", stamp, what,
                     mtml::to_string(cfg.dataset), mtml::to_string(cfg.fading), cfg.snr_db, cfg.d_sr, cfg.seed,
                     cfg.epochs[0], cfg.epochs[1], cfg.epochs[2]);
}

int cmd_train(const CommonArgs& common, const std::string& stage, const std::string& scheme,
              const std::string& resume) {
  std::optional<mtml::CheckpointState> prior;
  if (!resume.empty()) prior = mtml::load_checkpoint(resume);
  auto cfg = common.config.empty() && prior ? mtml::parse_config(prior->config_text) : resolve_config(common);
  if (common.seed) cfg.seed = *common.seed;

  const fs::path out(common.out);
  fs::create_directories(out);
  mtml::write_config(cfg, out / "resolved.cfg");
  const auto dims = mtml::derive_dims(cfg);
  std::cout << fmt::format("# n={} l={} complex symbols={} residual={}\n", dims.n_patches, dims.patch_len_real,
                           dims.complex_symbols, dims.residual);

  const auto [train, eval] = mtml::load_dataset(cfg);
  mtml::RelayNetwork net(cfg);
  mtml::RelayPipeline pipeline(net, cfg);
  std::ofstream log_file(out / "train_log.tsv", std::ios::app);
  mtml::Trainer trainer(pipeline, train, &log_file);
  if (prior) {
    mtml::restore_state(net, *prior);
    trainer.set_progress(prior->progress);
  }

  const auto schemes = parse_schemes(scheme);
  auto run3 = [&] {
    for (const auto s : schemes) trainer.run_stage3(s);
  };
  if (stage == "1") {
    trainer.run_stage1();
  } else if (stage == "2") {
    trainer.run_stage2();
  } else if (stage == "3") {
    run3();
  } else {
    trainer.run_stage1();
    trainer.run_stage2();
    run3();
  }
  mtml::save_checkpoint(trainer.checkpoint(), out / "checkpoint.ckpt");
  std::cout << fmt::format("checkpoint written to {}\n", (out / "checkpoint.ckpt").string());
  return 0;
}

int cmd_eval(const CommonArgs& common, const std::string& checkpoint, int trials) {
  const auto state = mtml::load_checkpoint(checkpoint);
  auto cfg = common.config.empty() ? mtml::parse_config(state.config_text) : resolve_config(common);
  if (common.seed) cfg.seed = *common.seed;
  const auto [train, eval] = mtml::load_dataset(cfg);
  mtml::RelayNetwork net(cfg);
  mtml::restore_state(net, state);
  mtml::RelayPipeline pipeline(net, cfg);

  mtml::ResultsTable table;
  for (int trial = 0; trial < trials; ++trial) {
    const auto seed = mtml::eval_noise_seed(cfg, trial);
    for (const auto s : {mtml::Scheme::kMtml, mtml::Scheme::kBaseline}) {
      if (!state.progress.completed(mtml::stage3_group(s))) continue;
      const auto r = mtml::evaluate(pipeline, eval, s, seed);
      table.rows.push_back({s, cfg.fading, cfg.snr_db, cfg.d_sr, r.psnr.db, r.psnr.saturated, r.accuracy, seed,
                            r.eval_size});
      std::cout << fmt::format("{}\tpsnr={:.3f} dB{}\taccuracy={:.4f}\tn={}\n", mtml::to_string(s), r.psnr.db,
                               r.psnr.saturated ? " (saturated)" : "", r.accuracy, r.eval_size);
    }
  }
  if (table.rows.empty()) throw mtml::StageOrderError("checkpoint has no trained stage-3 scheme to evaluate");
  const fs::path out(common.out);
  mtml::append_results(table, out / "results.csv", run_metadata(cfg, "eval"));
  return 0;
}

int cmd_sweep(const CommonArgs& common, const std::string& axis, const std::string& points,
              const std::string& schemes, std::string checkpoint_dir, bool train_on_demand, int trials) {
  const auto cfg = resolve_config(common);
  const fs::path out(common.out);
  fs::create_directories(out);
  mtml::write_config(cfg, out / "resolved.cfg");
  mtml::SweepOptions opts;
  if (axis == "snr") opts.axis = mtml::SweepAxis::kSnr;
  else if (axis == "distance") opts.axis = mtml::SweepAxis::kDistance;
  else throw mtml::Error(fmt::format("unknown axis '{}' (expected snr|distance)", axis));
  opts.points = parse_points(points);
  opts.schemes = parse_schemes(schemes);
  opts.checkpoint_dir = checkpoint_dir.empty() ? out / "checkpoints" : fs::path(checkpoint_dir);
  opts.train_on_demand = train_on_demand;
  opts.trials = trials;
  opts.log = &std::cout;
  const auto table = mtml::run_sweep(cfg, opts);
  mtml::append_results(table, out / "results.csv", run_metadata(cfg, fmt::format("sweep axis={}", axis)));
  std::cout << fmt::format("{} rows appended to {}\n", table.rows.size(), (out / "results.csv").string());
  return 0;
}

int cmd_plot(const CommonArgs& common, std::string results) {
  if (results.empty()) results = (fs::path(common.out) / "results.csv").string();
  const auto table = mtml::read_results(results);
  for (const auto& p : mtml::emit_plots(table, common.out)) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task relay semantic communication: train, eval, sweep, plot, selftest"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string stage = "all", scheme = "both", resume, checkpoint, axis = "snr", points, results, ckpt_dir;
  bool train_on_demand = false;
  int trials = 1;

  auto* train = app.add_subcommand("train", "Run the three-stage training");
  add_common(train, common);
  train->add_option("--stage", stage, "1, 2, 3 or all")->check(CLI::IsMember({"1", "2", "3", "all"}))
      ->capture_default_str();
  train->add_option("--scheme", scheme, "Stage-3 scheme: mtml_rsc, baseline or both")->capture_default_str();
  train->add_option("--checkpoint", resume, "Checkpoint to resume from");

  auto* eval = app.add_subcommand("eval", "Evaluate PSNR and accuracy of one checkpoint");
  add_common(eval, common);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate")->required();
  eval->add_option("--trials", trials, "Channel realizations per image")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Evaluate both schemes over an SNR or relay-position axis");
  add_common(sweep, common);
  sweep->add_option("--axis", axis, "snr or distance")->capture_default_str();
  sweep->add_option("--points", points, "Comma-separated axis values, e.g. -5,5,15")->required();
  sweep->add_option("--schemes", scheme, "mtml_rsc, baseline or both")->capture_default_str();
  sweep->add_option("--checkpoint-dir", ckpt_dir, "Per-point checkpoints (default <out>/checkpoints)");
  sweep->add_flag("--train-on-demand", train_on_demand, "Train missing checkpoints");
  sweep->add_option("--trials", trials, "Evaluation trials per point")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "Render figures and a CSV export from a results file");
  add_common(plot, common);
  plot->add_option("--results", results, "Results file (default <out>/results.csv)");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");
  add_common(selftest, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code;
  }

  try {
    if (*train) return cmd_train(common, stage, scheme, resume);
    if (*eval) return cmd_eval(common, checkpoint, trials);
    if (*sweep) return cmd_sweep(common, axis, points, scheme, ckpt_dir, train_on_demand, trials);
    if (*plot) return cmd_plot(common, results);
    if (*selftest) return mtml::run_selftest(std::cout) ? 0 : 1;
  } catch (const mtml::StageOrderError& e) {
    std::cerr << "stage-ordering error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
