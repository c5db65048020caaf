#include "mtml/channel.hpp"

#include <cmath>

#include <ATen/CPUGeneratorImpl.h>
#include <fmt/format.h>

#include "mtml/errors.hpp"

namespace mtml {

double LinkConfig::attenuation() const { return std::pow(distance, -exponent); }

double snr_to_noise_var(double snr_db, double power) {
  return power / std::pow(10.0, snr_db / 10.0);
}

ChannelSymbols power_normalize(const torch::Tensor& raw, double power) {
  TORCH_CHECK(raw.dim() >= 2, "power_normalize expects (batch, ...)");
  if (!raw.is_complex()) throw ChannelError("power_normalize expects complex symbols");
  const auto flat = raw.reshape({raw.size(0), -1});
  const int64_t count = flat.size(1);
  const auto norm = torch::linalg_vector_norm(flat, 2, {1}, /*keepdim=*/true);
  if ((norm == 0).any().item<bool>()) {
    throw ChannelError("power_normalize: all-zero sample cannot be normalised");
  }
  const double scale = std::sqrt(power * static_cast<double>(count));
  auto out = (flat * (scale / norm)).reshape(raw.sizes());
  return {out, power};
}

ReceivedSignal apply_link(const ChannelSymbols& x, const LinkConfig& link, torch::Generator& gen) {
  const auto opts = x.values.options().requires_grad(false);
  torch::Tensor gains;
  if (link.fading == Fading::kRayleigh) {
    gains = torch::randn(x.values.sizes(), gen, opts);  // CN(0,1): each part has variance 1/2
  } else {
    gains = torch::ones(x.values.sizes(), opts);
  }
  torch::Tensor noise;
  if (link.noise_var > 0.0) {
    noise = torch::randn(x.values.sizes(), gen, opts) * std::sqrt(link.noise_var);
  } else {
    noise = torch::zeros(x.values.sizes(), opts);
  }
  auto values = x.values * gains * link.attenuation() + noise;
  return {values, gains, noise, link};
}

torch::Tensor mmse_equalize(const ReceivedSignal& y, double power) {
  const auto g = y.gains * y.link.attenuation();
  const auto denom = g.abs().square() + y.link.noise_var / power;
  return g.conj() * y.values / denom;
}

torch::Tensor equalize(const ReceivedSignal& y, double power, AwgnEqualizer awgn_mode) {
  if (y.link.fading == Fading::kAwgn && awgn_mode == AwgnEqualizer::kPassThrough) return y.values;
  return mmse_equalize(y, power);
}

torch::Tensor complex_to_real(const torch::Tensor& x) {
  if (!x.is_complex()) throw ShapeError("complex_to_real expects a complex tensor");
  return torch::cat({torch::real(x), torch::imag(x)}, -1);
}

torch::Tensor real_to_complex(const torch::Tensor& x) {
  if (x.is_complex()) throw ShapeError("real_to_complex expects a real tensor");
  const int64_t l = x.size(-1);
  if (l % 2 != 0) throw ShapeError(fmt::format("real_to_complex: odd patch length {}", l));
  const auto parts = x.split(l / 2, -1);
  return torch::complex(parts[0].contiguous(), parts[1].contiguous());
}

RelayLinks make_links(const ExperimentConfig& cfg) {
  const double noise = snr_to_noise_var(cfg.snr_db, cfg.power);
  RelayLinks links;
  links.source_relay = {cfg.d_sr, cfg.path_loss_exp, cfg.fading, noise};
  links.source_destination = {ExperimentConfig::kDistanceSd, cfg.path_loss_exp, cfg.fading, noise};
  links.relay_destination = {cfg.d_rd(), cfg.path_loss_exp, cfg.fading, noise};
  return links;
}

torch::Generator make_generator(uint64_t seed) {
  return at::make_generator<at::CPUGeneratorImpl>(seed);
}

}  // namespace mtml
