#pragma once

#include <functional>

#include <torch/torch.h>

#include "mtml/channel.hpp"
#include "mtml/network.hpp"

namespace mtml {

/// Everything one pass through the three-node system produces.
struct ForwardOutputs {
  torch::Tensor relay_recon;   // s_hat^r
  torch::Tensor relay_logits;  // z^r scores; undefined for the baseline
  torch::Tensor dest_logits;   // z^d scores
  torch::Tensor dest_recon;    // s_hat^d
  ReceivedSignal source_relay;
  ReceivedSignal source_destination;
  ReceivedSignal relay_destination;
};

/// Where a label enters a class-aided codec.
enum class LabelSite { kRelayEncoder, kDestinationDecoder };

/// Observer invoked with every label tensor handed to a class-aided codec.
using LabelProbe = std::function<void(LabelSite, const torch::Tensor&)>;

/// Result of the source -> relay leg (stage-1 training path).
struct SourceRelayPass {
  ChannelSymbols transmitted;
  ReceivedSignal received;
  torch::Tensor relay_recon;
};

/// Runs the source, relay and destination nodes over simulated links.
///
/// Channel draws happen in a fixed order (SR, SD, RD) from the caller's
/// generator, so both schemes see identical realizations for the same seed.
/// In the full-system passes the stage-1/2 modules run without autograd and
/// the relay reconstruction is treated as data.
class RelayPipeline {
 public:
  RelayPipeline(RelayNetwork net, const ExperimentConfig& cfg);

  /// Source encoder, SR link, relay equalizer and decoder, with autograd.
  SourceRelayPass source_to_relay(const torch::Tensor& images, torch::Generator& gen);

  /// Training pass: the true labels condition both class-aided codecs.
  ForwardOutputs forward_mtml_train(const torch::Tensor& images, const torch::Tensor& labels,
                                    torch::Generator& gen);

  /// Inference pass: the relay conditions on argmax z^r and the destination
  /// decoder on argmax z^d. No ground-truth label can enter.
  ForwardOutputs forward_mtml_infer(const torch::Tensor& images, torch::Generator& gen);

  /// Relay-only baseline: plain relay re-encoding; the destination classifier
  /// and decoder see only the RD signal.
  ForwardOutputs forward_baseline(const torch::Tensor& images, torch::Generator& gen);

  void set_label_probe(LabelProbe probe) { probe_ = std::move(probe); }

  RelayNetwork& network() { return net_; }
  const ExperimentConfig& config() const { return cfg_; }
  const RelayLinks& links() const { return links_; }

 private:
  struct Broadcast {
    torch::Tensor relay_recon;
    torch::Tensor sd_real;
    ReceivedSignal sr;
    ReceivedSignal sd;
  };
  Broadcast broadcast(const torch::Tensor& images, torch::Generator& gen);
  ForwardOutputs mtml(const torch::Tensor& images, const torch::Tensor* labels, torch::Generator& gen);
  void notify(LabelSite site, const torch::Tensor& labels) const;

  RelayNetwork net_;
  ExperimentConfig cfg_;
  RelayLinks links_;
  LabelProbe probe_;
};

}  // namespace mtml
