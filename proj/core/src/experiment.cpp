#include "mtml/experiment.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mtml/errors.hpp"
#include "mtml/trainer.hpp"

namespace mtml {

namespace fs = std::filesystem;

EvalResult evaluate(RelayPipeline& pipeline, const LabeledImageSet& eval, Scheme scheme, uint64_t noise_seed) {
  torch::NoGradGuard no_grad;
  auto gen = make_generator(noise_seed);
  const auto batch = pipeline.config().batch_size;
  double psnr_sum = 0.0;
  bool saturated = false;
  int64_t hits = 0;
  for (int64_t start = 0; start < eval.size(); start += batch) {
    const auto end = std::min(eval.size(), start + batch);
    const auto images = eval.images.slice(0, start, end);
    const auto labels = eval.labels.slice(0, start, end);
    const auto out = scheme == Scheme::kMtml ? pipeline.forward_mtml_infer(images, gen)
                                             : pipeline.forward_baseline(images, gen);
    const auto per_image = psnr_per_image(images, out.dest_recon);
    psnr_sum += per_image.sum().item<double>();
    saturated = saturated || psnr(images, out.dest_recon).saturated;
    hits += (predict(out.dest_logits) == labels).sum().item<int64_t>();
  }
  EvalResult r;
  r.scheme = scheme;
  r.eval_size = eval.size();
  r.psnr = {eval.size() > 0 ? psnr_sum / static_cast<double>(eval.size()) : 0.0, saturated};
  r.accuracy = eval.size() > 0 ? static_cast<double>(hits) / static_cast<double>(eval.size()) : 0.0;
  r.seed = noise_seed;
  return r;
}

uint64_t eval_noise_seed(const ExperimentConfig& cfg, int trial) {
  return cfg.seed * 104729ULL + 0x5eedULL + static_cast<uint64_t>(trial);
}

TrainingProgress train_missing(RelayPipeline& pipeline, const LabeledImageSet& train, TrainingProgress progress,
                               const std::vector<Scheme>& schemes, std::ostream* log, std::string* optimizer_state) {
  Trainer trainer(pipeline, train, log);
  trainer.set_progress(progress);
  if (!progress.stage1) trainer.run_stage1();
  if (!trainer.progress().stage2) trainer.run_stage2();
  for (const auto s : schemes) {
    if (!trainer.progress().completed(stage3_group(s))) trainer.run_stage3(s);
  }
  if (optimizer_state != nullptr) *optimizer_state = trainer.optimizer_state();
  return trainer.progress();
}

ExperimentConfig config_for_point(const ExperimentConfig& base, SweepAxis axis, double value) {
  auto cfg = base;
  if (axis == SweepAxis::kSnr) {
    cfg.snr_db = value;
  } else {
    cfg.d_sr = value;
  }
  validate(cfg);
  return cfg;
}

fs::path checkpoint_path(const fs::path& dir, const ExperimentConfig& cfg) {
  return dir / fmt::format("{}_snr{}_dsr{}_seed{}.ckpt", to_string(cfg.fading), cfg.snr_db, cfg.d_sr, cfg.seed);
}

ResultsTable run_sweep(const ExperimentConfig& base, const SweepOptions& opts) {
  if (opts.points.empty()) throw Error("sweep: no points given");
  if (opts.trials < 1) throw Error("sweep: trials must be at least 1");
  auto points = opts.points;
  std::sort(points.begin(), points.end());
  const auto [train, eval] = load_dataset(base);

  ResultsTable table;
  for (const double value : points) {
    const auto cfg = config_for_point(base, opts.axis, value);
    const auto ckpt = checkpoint_path(opts.checkpoint_dir, cfg);
    RelayNetwork net(cfg);
    RelayPipeline pipeline(net, cfg);
    TrainingProgress progress;
    std::string optimizer_state;
    if (fs::exists(ckpt)) {
      auto state = load_checkpoint(ckpt);
      if (state.config_text != to_config_text(cfg)) {
        throw CheckpointError(fmt::format("'{}' was trained with a different configuration", ckpt.string()));
      }
      restore_state(net, state);
      progress = state.progress;
      optimizer_state = std::move(state.optimizer_state);
    }
    bool complete = progress.stage1 && progress.stage2;
    for (const auto s : opts.schemes) complete = complete && progress.completed(stage3_group(s));
    if (!complete) {
      if (!opts.train_on_demand) {
        throw Error(fmt::format("sweep: missing or incomplete checkpoint '{}' (pass --train-on-demand)",
                                ckpt.string()));
      }
      if (opts.log) *opts.log << fmt::format("# training point {}\n", ckpt.filename().string());
      progress = train_missing(pipeline, train, progress, opts.schemes, opts.log, &optimizer_state);
      save_checkpoint(capture_state(net, progress, optimizer_state), ckpt);
    }
    for (int trial = 0; trial < opts.trials; ++trial) {
      const auto seed = eval_noise_seed(cfg, trial);
      for (const auto s : opts.schemes) {
        const auto r = evaluate(pipeline, eval, s, seed);
        table.rows.push_back({s, cfg.fading, cfg.snr_db, cfg.d_sr, r.psnr.db, r.psnr.saturated, r.accuracy, seed,
                              r.eval_size});
        if (opts.log) {
          *opts.log << fmt::format("{}\tsnr={}\td_sr={}\tpsnr={:.3f} dB\tacc={:.4f}\n", to_string(s), cfg.snr_db,
                                   cfg.d_sr, r.psnr.db, r.accuracy);
        }
      }
    }
  }
  return table;
}

}  // namespace mtml
