#include "mtml/pipeline.hpp"

namespace mtml {

RelayPipeline::RelayPipeline(RelayNetwork net, const ExperimentConfig& cfg)
    : net_(std::move(net)), cfg_(cfg), links_(make_links(cfg)) {}

void RelayPipeline::notify(LabelSite site, const torch::Tensor& labels) const {
  if (probe_) probe_(site, labels);
}

SourceRelayPass RelayPipeline::source_to_relay(const torch::Tensor& images, torch::Generator& gen) {
  auto x_s = net_->source_encoder->encode(images);
  auto y_r = apply_link(x_s, links_.source_relay, gen);
  auto recon = net_->relay_decoder->forward(complex_to_real(equalize(y_r, cfg_.power, cfg_.awgn_equalizer)));
  return {std::move(x_s), std::move(y_r), std::move(recon)};
}

RelayPipeline::Broadcast RelayPipeline::broadcast(const torch::Tensor& images, torch::Generator& gen) {
  torch::NoGradGuard frozen;
  auto x_s = net_->source_encoder->encode(images);
  auto y_r = apply_link(x_s, links_.source_relay, gen);
  auto y_d = apply_link(x_s, links_.source_destination, gen);
  auto recon = net_->relay_decoder->forward(complex_to_real(equalize(y_r, cfg_.power, cfg_.awgn_equalizer)));
  auto sd_real = complex_to_real(equalize(y_d, cfg_.power, cfg_.awgn_equalizer));
  return {recon, sd_real, std::move(y_r), std::move(y_d)};
}

ForwardOutputs RelayPipeline::mtml(const torch::Tensor& images, const torch::Tensor* labels, torch::Generator& gen) {
  auto b = broadcast(images, gen);
  ForwardOutputs out;
  out.relay_recon = b.relay_recon;
  {
    torch::NoGradGuard frozen;
    out.relay_logits = net_->relay_classifier->forward(b.relay_recon);
  }
  const torch::Tensor relay_labels = labels ? *labels : predict(out.relay_logits);
  notify(LabelSite::kRelayEncoder, relay_labels);
  auto x_r = net_->mtml_relay_encoder->encode(b.relay_recon, relay_labels);
  auto y_f = apply_link(x_r, links_.relay_destination, gen);
  const auto rd_real = complex_to_real(equalize(y_f, cfg_.power, cfg_.awgn_equalizer));

  const auto fused = net_->mtml_fusion->forward(b.sd_real, rd_real);
  out.dest_logits = net_->mtml_dest_classifier->forward(fused);
  const torch::Tensor dest_labels = labels ? *labels : predict(out.dest_logits);
  notify(LabelSite::kDestinationDecoder, dest_labels);
  const auto& decoder_in = cfg_.decoder_input == DecoderInput::kFused ? fused : rd_real;
  out.dest_recon = net_->mtml_dest_decoder->forward(decoder_in, dest_labels);

  out.source_relay = std::move(b.sr);
  out.source_destination = std::move(b.sd);
  out.relay_destination = std::move(y_f);
  return out;
}

ForwardOutputs RelayPipeline::forward_mtml_train(const torch::Tensor& images, const torch::Tensor& labels,
                                                 torch::Generator& gen) {
  check_labels(labels, cfg_.num_classes);
  return mtml(images, &labels, gen);
}

ForwardOutputs RelayPipeline::forward_mtml_infer(const torch::Tensor& images, torch::Generator& gen) {
  return mtml(images, nullptr, gen);
}

ForwardOutputs RelayPipeline::forward_baseline(const torch::Tensor& images, torch::Generator& gen) {
  auto b = broadcast(images, gen);
  ForwardOutputs out;
  out.relay_recon = b.relay_recon;
  auto x_r = net_->baseline_relay_encoder->encode(b.relay_recon);
  auto y_f = apply_link(x_r, links_.relay_destination, gen);
  const auto rd_real = complex_to_real(equalize(y_f, cfg_.power, cfg_.awgn_equalizer));
  out.dest_logits = net_->baseline_dest_classifier->forward(rd_real);
  out.dest_recon = net_->baseline_dest_decoder->forward(rd_real);
  out.source_relay = std::move(b.sr);
  out.source_destination = std::move(b.sd);
  out.relay_destination = std::move(y_f);
  return out;
}

}  // namespace mtml
