#include "mtml/selftest.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mtml/channel.hpp"
#include "mtml/class_codec.hpp"
#include "mtml/config.hpp"
#include "mtml/fusion.hpp"
#include "mtml/jscc.hpp"
#include "mtml/losses.hpp"

namespace mtml {

bool run_selftest(std::ostream& out) {
  std::vector<std::pair<std::string, std::function<bool()>>> checks;

  checks.emplace_back("dims 96x96 cbr 1/12 -> n=576 l=8", [] {
    ExperimentConfig cfg;
    cfg.image_size = 96;
    const auto d = derive_dims(cfg);
    return d.n_patches == 576 && d.patch_len_real == 8 && d.complex_symbols == 2304;
  });
  checks.emplace_back("awgn noise variance within 2%", [] {
    auto gen = make_generator(1);
    const double var = snr_to_noise_var(10.0, 1.0);
    ChannelSymbols x{torch::ones({1, 200000}, torch::kComplexDouble), 1.0};
    const auto y = apply_link(x, {1.0, 2.0, Fading::kAwgn, var}, gen);
    const double measured = (y.values - x.values).abs().square().mean().item<double>();
    return std::abs(measured / var - 1.0) < 0.02;
  });
  checks.emplace_back("rayleigh E|h|^2 within 1%", [] {
    auto gen = make_generator(2);
    ChannelSymbols x{torch::ones({1, 400000}, torch::kComplexDouble), 1.0};
    const auto y = apply_link(x, {0.5, 2.0, Fading::kRayleigh, 0.1}, gen);
    return std::abs(y.gains.abs().square().mean().item<double>() - 1.0) < 0.01;
  });
  checks.emplace_back("noiseless mmse inverts the channel", [] {
    auto gen = make_generator(3);
    const auto x = power_normalize(torch::randn({4, 16, 4}, gen, torch::kComplexDouble), 1.0);
    auto y = apply_link(x, {0.7, 2.0, Fading::kRayleigh, 0.0}, gen);
    const auto x_hat = mmse_equalize(y, 1.0);
    return ((x_hat - x.values).norm() / x.values.norm()).item<double>() < 1e-6;
  });
  checks.emplace_back("encoder output has unit symbol power", [] {
    torch::manual_seed(4);
    CodecOptions opts;
    JsccEncoder enc(opts);
    torch::NoGradGuard g;
    const auto x = enc->encode(torch::rand({3, 3, 32, 32}));
    const auto p = x.values.abs().square().mean({1, 2});
    return (p - 1.0).abs().max().item<double>() < 1e-5;
  });
  checks.emplace_back("uniform logits give ln(C) cross-entropy", [] {
    const auto ce = classification_loss(torch::zeros({2, 10}, torch::kDouble), torch::tensor({3L, 7L}));
    return std::abs(ce.item<double>() - std::log(10.0)) < 1e-9;
  });
  checks.emplace_back("unit gates reduce class-aided encoder to plain", [] {
    torch::manual_seed(5);
    CodecOptions opts;
    ClassAidedEncoder aided(opts, 3);
    aided->gate(1)->force_unit_gate();
    aided->gate(2)->force_unit_gate();
    torch::NoGradGuard g;
    const auto img = torch::rand({2, 3, 32, 32});
    return torch::equal(aided->encode(img, torch::tensor({0L, 2L})).values, aided->backbone()->encode(img).values);
  });
  checks.emplace_back("fusion returns the common V row when keys and values agree", [] {
    const auto q = torch::randn({1, 1, 4, 4}, torch::kDouble);
    const auto k = torch::randn({1, 1, 1, 4}, torch::kDouble).expand({1, 1, 4, 4});
    const auto v = torch::randn({1, 1, 1, 4}, torch::kDouble).expand({1, 1, 4, 4});
    const auto r = scaled_dot_attention(q, k, v);
    return (r.output - v).abs().max().item<double>() < 1e-6;
  });

  bool ok = true;
  for (const auto& [name, check] : checks) {
    bool passed = false;
    try {
      passed = check();
    } catch (const std::exception& e) {
      out << fmt::format("  error: {}\n", e.what());
    }
    out << fmt::format("[{}] {}\n", passed ? "PASS" : "FAIL", name);
    ok = ok && passed;
  }
  return ok;
}

}  // namespace mtml
