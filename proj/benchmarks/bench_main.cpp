#include <benchmark/benchmark.h>

#include "mtml/channel.hpp"
#include "mtml/class_codec.hpp"
#include "mtml/fusion.hpp"
#include "mtml/jscc.hpp"

namespace {

using namespace mtml;

void BM_ApplyLink(benchmark::State& state) {
  auto gen = make_generator(0);
  const ChannelSymbols x{torch::randn({32, 64, 4}, torch::kComplexFloat), 1.0};
  const LinkConfig link{0.5, 2.0, state.range(0) ? Fading::kRayleigh : Fading::kAwgn, 0.1};
  for (auto _ : state) {
    auto y = apply_link(x, link, gen);
    benchmark::DoNotOptimize(mmse_equalize(y, 1.0));
  }
  state.SetItemsProcessed(state.iterations() * x.values.numel());
}
BENCHMARK(BM_ApplyLink)->Arg(0)->Arg(1);

CodecOptions codec(int64_t side) {
  CodecOptions c;
  c.image_size = side;
  if (side == 96) {
    c.blocks = {2, 4};
    c.widths = {128, 256};
    c.window = 8;
  }
  return c;
}

void BM_EncoderForward(benchmark::State& state) {
  const auto c = codec(state.range(0));
  JsccEncoder enc(c);
  torch::NoGradGuard g;
  const auto img = torch::rand({8, 3, c.image_size, c.image_size});
  for (auto _ : state) benchmark::DoNotOptimize(enc->encode(img).values);
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_EncoderForward)->Arg(32)->Arg(96)->Unit(benchmark::kMillisecond);

void BM_ClassAidedEncoderForward(benchmark::State& state) {
  const auto c = codec(32);
  ClassAidedEncoder enc(c, 10);
  torch::NoGradGuard g;
  const auto img = torch::rand({8, 3, 32, 32});
  const auto labels = torch::randint(0, 10, {8}, torch::kLong);
  for (auto _ : state) benchmark::DoNotOptimize(enc->encode(img, labels).values);
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_ClassAidedEncoderForward)->Unit(benchmark::kMillisecond);

void BM_FusionForward(benchmark::State& state) {
  FusionOptions o;
  o.groups = state.range(0);
  MutualAttention fusion(o);
  torch::NoGradGuard g;
  const auto sd = torch::randn({8, o.groups, o.patch_len});
  const auto rd = torch::randn({8, o.groups, o.patch_len});
  for (auto _ : state) benchmark::DoNotOptimize(fusion->forward(sd, rd));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_FusionForward)->Arg(64)->Arg(576)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
