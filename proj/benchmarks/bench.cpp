#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "scnn/conv.hpp"
#include "scnn/lif.hpp"
#include "scnn/mask.hpp"
#include "scnn/net.hpp"

namespace {

scnn::Tensor4 random_tensor(scnn::Shape4 shape, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  scnn::Tensor4 t(shape);
  for (float& x : t.data()) {
    x = dist(gen);
  }
  return t;
}

scnn::ConvLayerParams conv_params(std::size_t channels) {
  scnn::ConvLayerParams p = scnn::make_conv_params(channels, channels, 3, 1, 1);
  p.weight = random_tensor(p.weight.shape(), 2);
  return p;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto res = static_cast<std::size_t>(state.range(0));
  const scnn::Tensor4 input = random_tensor({8, 32, res, res}, 1);
  const scnn::ConvLayerParams p = conv_params(32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scnn::conv2d_forward(input, p));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Conv2dForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const auto res = static_cast<std::size_t>(state.range(0));
  const scnn::Tensor4 input = random_tensor({8, 32, res, res}, 1);
  const scnn::Tensor4 grad = random_tensor({8, 32, res, res}, 3);
  const scnn::ConvLayerParams p = conv_params(32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scnn::conv2d_backward(input, p, grad));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Conv2dBackward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_NetworkForward(benchmark::State& state) {
  const scnn::Model model = scnn::build_model(scnn::NetConfig{});
  const scnn::Tensor4 mask = scnn::generate_mask(32, 32, scnn::MaskSpec{}, 0);
  scnn::Tensor4 image = random_tensor({1, 3, 32, 32}, 4);
  const scnn::ModelInput input{scnn::apply_mask(image, mask), mask};
  scnn::ForwardOptions options;
  options.training = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scnn::forward(model, input, options));
  }
}
BENCHMARK(BM_NetworkForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_NetworkTrainStep(benchmark::State& state) {
  const scnn::Model model = scnn::build_model(scnn::NetConfig{});
  const scnn::Tensor4 mask = scnn::generate_mask(32, 32, scnn::MaskSpec{}, 0);
  scnn::Tensor4 image = random_tensor({1, 3, 32, 32}, 4);
  const scnn::ModelInput input{scnn::apply_mask(image, mask), mask};
  scnn::ForwardOptions options;
  options.training = true;
  const scnn::Tensor4 grad = random_tensor({1, 3, 32, 32}, 5);
  for (auto _ : state) {
    const scnn::ForwardResult fwd = scnn::forward(model, input, options);
    benchmark::DoNotOptimize(scnn::backward(model, fwd, grad));
  }
}
BENCHMARK(BM_NetworkTrainStep)->Unit(benchmark::kMillisecond);

void BM_SimulateNeuron(benchmark::State& state) {
  const std::vector<double> currents(static_cast<std::size_t>(state.range(0)), 1.5);
  const scnn::LifParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(scnn::simulate_neuron(currents, params));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateNeuron)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
