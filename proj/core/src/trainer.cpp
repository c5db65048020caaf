#include "mtml/trainer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mtml/errors.hpp"
#include "mtml/losses.hpp"
#include "mtml/metrics.hpp"

namespace mtml {

namespace {

// Distinct generator streams per stage.
uint64_t stream_seed(uint64_t seed, int stage, uint64_t epoch) {
  return seed * 1000003ULL + static_cast<uint64_t>(stage) * 7919ULL + epoch;
}

struct Accumulator {
  double loss = 0, mse = 0, ce = 0, psnr = 0;
  int64_t hits = 0, images = 0, batches = 0;

  void add(double l, double m, double c, double p_sum, int64_t h, int64_t n) {
    loss += l, mse += m, ce += c, psnr += p_sum, hits += h, images += n, ++batches;
  }
  EpochRecord finish(int stage, std::string scheme, int64_t epoch) const {
    const double nb = static_cast<double>(std::max<int64_t>(batches, 1));
    const double ni = static_cast<double>(std::max<int64_t>(images, 1));
    return {stage, std::move(scheme), epoch, loss / nb, mse / nb, ce / nb, psnr / ni, static_cast<double>(hits) / ni};
  }
};

}  // namespace

std::string epoch_log_header() { return "stage\tscheme\tepoch\tloss\tmse\tcross_entropy\tpsnr_db\taccuracy"; }

std::string format_epoch(const EpochRecord& r) {
  return fmt::format("{}\t{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.3f}\t{:.4f}", r.stage, r.scheme, r.epoch, r.loss, r.mse,
                     r.cross_entropy, r.psnr_db, r.accuracy);
}

Trainer::Trainer(RelayPipeline& pipeline, const LabeledImageSet& train, std::ostream* log)
    : pipeline_(pipeline), train_(train), log_(log) {}

void Trainer::emit(const EpochRecord& r) {
  if (log_ == nullptr) return;
  if (!header_written_) {
    *log_ << epoch_log_header() << '\n';
    header_written_ = true;
  }
  *log_ << format_epoch(r) << std::endl;
}

void Trainer::check_finite(const EpochRecord& partial, int64_t batch, double loss) const {
  if (!std::isfinite(loss)) {
    throw TrainingDivergedError(fmt::format("non-finite loss {} at stage {} ({}), epoch {}, batch {}; "
                                            "running mse {:.6g}, ce {:.6g}",
                                            loss, partial.stage, partial.scheme, partial.epoch, batch, partial.mse,
                                            partial.cross_entropy));
  }
}

torch::optim::Adam& Trainer::start_stage(ParamGroup group) {
  auto& net = pipeline_.network();
  net->freeze_all_but(group);
  optimizer_ = std::make_unique<torch::optim::Adam>(
      net->parameters_of(group), torch::optim::AdamOptions(pipeline_.config().learning_rate));
  return *optimizer_;
}

std::vector<EpochRecord> Trainer::run_stage1() {
  const auto& cfg = pipeline_.config();
  auto& opt = start_stage(ParamGroup::kStage1);
  std::vector<EpochRecord> records;
  for (int64_t epoch = 0; epoch < cfg.epochs[0]; ++epoch) {
    auto gen = make_generator(stream_seed(cfg.seed, 1, epoch));
    Accumulator acc;
    int64_t b = 0;
    for (const auto& idx : epoch_batches(train_.size(), cfg.batch_size, stream_seed(cfg.seed, 11, epoch))) {
      const auto images = train_.images.index_select(0, idx);
      opt.zero_grad();
      auto pass = pipeline_.source_to_relay(images, gen);
      auto loss = reconstruction_loss(images, pass.relay_recon);
      const double l = loss.item<double>();
      check_finite(acc.finish(1, "shared", epoch), b++, l);
      loss.backward();
      opt.step();
      acc.add(l, l, 0.0, psnr_per_image(images, pass.relay_recon.detach()).sum().item<double>(), 0, idx.size(0));
    }
    records.push_back(acc.finish(1, "shared", epoch));
    emit(records.back());
  }
  progress_.mark(ParamGroup::kStage1);
  return records;
}

std::vector<EpochRecord> Trainer::run_stage2() {
  if (!progress_.stage1) throw StageOrderError("stage 2 requires a trained stage-1 codec");
  const auto& cfg = pipeline_.config();
  auto& opt = start_stage(ParamGroup::kStage2);
  auto& net = pipeline_.network();
  std::vector<EpochRecord> records;
  for (int64_t epoch = 0; epoch < cfg.epochs[1]; ++epoch) {
    auto gen = make_generator(stream_seed(cfg.seed, 2, epoch));
    Accumulator acc;
    int64_t b = 0;
    for (const auto& idx : epoch_batches(train_.size(), cfg.batch_size, stream_seed(cfg.seed, 12, epoch))) {
      const auto images = train_.images.index_select(0, idx);
      const auto labels = train_.labels.index_select(0, idx);
      torch::Tensor recon;
      {
        torch::NoGradGuard frozen;
        recon = pipeline_.source_to_relay(images, gen).relay_recon;
      }
      opt.zero_grad();
      const auto logits = net->relay_classifier->forward(recon);
      auto loss = classification_loss(logits, labels);
      const double l = loss.item<double>();
      check_finite(acc.finish(2, "shared", epoch), b++, l);
      loss.backward();
      opt.step();
      const auto hits = (predict(logits) == labels).sum().item<int64_t>();
      acc.add(l, 0.0, l, psnr_per_image(images, recon).sum().item<double>(), hits, idx.size(0));
    }
    records.push_back(acc.finish(2, "shared", epoch));
    emit(records.back());
  }
  progress_.mark(ParamGroup::kStage2);
  return records;
}

std::vector<EpochRecord> Trainer::run_stage3(Scheme scheme) {
  if (!progress_.stage1 || !progress_.stage2) {
    throw StageOrderError("stage 3 requires trained stage-1 codec and stage-2 relay classifier");
  }
  const auto& cfg = pipeline_.config();
  const auto group = stage3_group(scheme);
  auto& opt = start_stage(group);
  const std::string name(to_string(scheme));
  std::vector<EpochRecord> records;
  for (int64_t epoch = 0; epoch < cfg.epochs[2]; ++epoch) {
    // Same stream for both schemes: identical channel realizations.
    auto gen = make_generator(stream_seed(cfg.seed, 3, epoch));
    Accumulator acc;
    int64_t b = 0;
    for (const auto& idx : epoch_batches(train_.size(), cfg.batch_size, stream_seed(cfg.seed, 13, epoch))) {
      const auto images = train_.images.index_select(0, idx);
      const auto labels = train_.labels.index_select(0, idx);
      opt.zero_grad();
      const auto out = scheme == Scheme::kMtml ? pipeline_.forward_mtml_train(images, labels, gen)
                                               : pipeline_.forward_baseline(images, gen);
      auto loss = joint_loss(images, out.dest_recon, out.dest_logits, labels, cfg.lambda_cls);
      const double l = loss.total.item<double>();
      check_finite(acc.finish(3, name, epoch), b++, l);
      loss.total.backward();
      opt.step();
      const auto hits = (predict(out.dest_logits) == labels).sum().item<int64_t>();
      acc.add(l, loss.mse.item<double>(), loss.cross_entropy.item<double>(),
              psnr_per_image(images, out.dest_recon.detach()).sum().item<double>(), hits, idx.size(0));
    }
    records.push_back(acc.finish(3, name, epoch));
    emit(records.back());
  }
  progress_.mark(group);
  return records;
}

std::string Trainer::optimizer_state() const {
  return optimizer_ ? serialize_optimizer(*optimizer_) : std::string{};
}

CheckpointState Trainer::checkpoint() {
  return capture_state(pipeline_.network(), progress_, optimizer_state());
}

}  // namespace mtml
