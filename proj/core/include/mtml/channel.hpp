#pragma once

#include <torch/torch.h>

#include "mtml/config.hpp"

namespace mtml {

/// Complex transmit block, shape (batch, n, l/2), scaled so that each sample's
/// mean per-symbol power equals `power`.
struct ChannelSymbols {
  torch::Tensor values;
  double power = 1.0;
};

/// One point-to-point link: large-scale attenuation d^-a, small-scale fading
/// kind and receiver noise variance.
struct LinkConfig {
  double distance = 1.0;
  double exponent = 2.0;
  Fading fading = Fading::kAwgn;
  double noise_var = 1.0;

  /// Amplitude attenuation d^-a.
  double attenuation() const;
};

/// Output of a link plus everything the receiver (or a test) may need:
/// realized fading `gains` h (all ones for AWGN) and the drawn `noise`.
struct ReceivedSignal {
  torch::Tensor values;
  torch::Tensor gains;
  torch::Tensor noise;
  LinkConfig link;
};

/// sigma^2 = P / 10^(snr/10).
double snr_to_noise_var(double snr_db, double power);

/// Per-sample normalisation: each sample is scaled to sqrt(P * N) / ||x||,
/// N being the per-sample element count. Throws ChannelError on an all-zero sample.
ChannelSymbols power_normalize(const torch::Tensor& raw, double power);

/// y_i = d^-a h_i x_i + n_i, with h_i ~ CN(0,1) (Rayleigh) or 1 (AWGN) and
/// n_i ~ CN(0, sigma^2), all drawn from `gen`.
ReceivedSignal apply_link(const ChannelSymbols& x, const LinkConfig& link, torch::Generator& gen);

/// Linear MMSE estimate with perfect CSI:
///   x_hat = conj(g) y / (|g|^2 + sigma^2 / P),   g = d^-a h.
torch::Tensor mmse_equalize(const ReceivedSignal& y, double power);

/// Receiver front end: MMSE for Rayleigh links, and for AWGN links either the
/// same scalar MMSE or an identity pass-through.
torch::Tensor equalize(const ReceivedSignal& y, double power, AwgnEqualizer awgn_mode);

/// (..., n, l/2) complex -> (..., n, l) real; real parts first, then imaginary parts.
torch::Tensor complex_to_real(const torch::Tensor& x);
/// Inverse of complex_to_real. Throws ShapeError on odd l.
torch::Tensor real_to_complex(const torch::Tensor& x);

/// The three links of one experiment point. SNR is referenced to the
/// source-destination link and all links share sigma^2.
struct RelayLinks {
  LinkConfig source_relay;
  LinkConfig source_destination;
  LinkConfig relay_destination;
};

RelayLinks make_links(const ExperimentConfig& cfg);

/// CPU generator seeded deterministically.
torch::Generator make_generator(uint64_t seed);

}  // namespace mtml
