// Copyright 2026 The ETTFS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "ettfs/ettfs.hpp"

using namespace ettfs;

namespace {

Tensor<float> random_dense(Shape shape, uint32_t seed, float scale = 1.f) {
  std::mt19937 rng(seed);
  return Tensor<float>::uniform(std::move(shape), scale, rng);
}

Tensor<float> one_spike(Shape item, int64_t t, int64_t batch, uint32_t seed) {
  std::mt19937 rng(seed);
  Shape shape{t, batch};
  shape.insert(shape.end(), item.begin(), item.end());
  Tensor<float> x(shape);
  const int64_t feat = numel(item);
  for (int64_t u = 0; u < batch * feat; ++u) {
    x.val()[size_t((rng() % uint64_t(t)) * batch * feat + u)] = 1.f;
  }
  return x;
}

void BM_matmul_dense(benchmark::State& state) {
  const int64_t n = state.range(0);
  Tensor<float> a = random_dense({n, n}, 1);
  Tensor<float> b = random_dense({n, n}, 2);
  for (auto _ : state) {
    Tensor<float> c = matmul(a, b);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_matmul_dense)->Arg(256)->Arg(512);

// one-spike rows are mostly zeros; the kernels skip them, which is where the
// event-driven speedup over dense inputs comes from
void BM_linear_spike_rows(benchmark::State& state) {
  Tensor<float> x = one_spike({784}, 8, 128, 3);
  Tensor<float> w = random_dense({784, 400}, 4, 0.2f);
  for (auto _ : state) {
    Tensor<float> y = linear(x, w);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * 8 * 128 * 784 * 400 * 2);
}
BENCHMARK(BM_linear_spike_rows);

void BM_conv2d_forward(benchmark::State& state) {
  Tensor<float> x = one_spike({1, 28, 28}, 8, 16, 5);
  Tensor<float> w = random_dense({16, 1, 5, 5}, 6, 0.3f);
  for (auto _ : state) {
    Tensor<float> y = conv2d(x, w, 1);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_conv2d_forward);

void BM_amos_unroll(benchmark::State& state) {
  Tensor<float> current = random_dense({8, 128, 400}, 7, 2.f);
  AmosConfig cfg;
  for (auto _ : state) {
    Tensor<float> s = amos_run_sequence(current, cfg, RunMode::kTrain);
    benchmark::DoNotOptimize(s.data());
  }
}
BENCHMARK(BM_amos_unroll);

void BM_train_step_fc400(benchmark::State& state) {
  NetworkSpec spec = parse_arch("FC400-FC10", {784}, 8);
  Network<float> net(spec, AmosConfig{}, NormMode::kAffine);
  init_weights(net, InitScheme{InitKind::kEttfs}, 1);
  std::vector<Tensor<float>> params = net.parameters();
  Optimizer<float> opt(OptimizerConfig{}, params);
  DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 2.0, 8);
  Tensor<float> x = one_spike({784}, 8, 128, 8);
  std::vector<int> labels(128);
  for (size_t i = 0; i < labels.size(); ++i) labels[i] = int(i % 10);
  for (auto _ : state) {
    Tape<float> tape;
    {
      TapeScope<float> scope(tape);
      SpikeTensor<float> out = net.forward({x, true, true}, RunMode::kTrain);
      Tensor<float> loss = mse_loss(decode(out.values, dw), labels, dw);
      tape.backward(loss);
    }
    opt.step(1e-3);
    opt.zero_grad();
  }
  state.SetLabel("batch=128 T=8");
}
BENCHMARK(BM_train_step_fc400)->Unit(benchmark::kMillisecond);

void BM_early_stop_eval(benchmark::State& state) {
  NetworkSpec spec = parse_arch("FC400-FC10", {784}, 8);
  Network<float> net(spec, AmosConfig{}, NormMode::kAffine);
  init_weights(net, InitScheme{InitKind::kEttfs}, 2);
  net.refresh_effective();
  Tensor<float> x = one_spike({784}, 8, 128, 9);
  for (auto _ : state) {
    NetworkStepper<float> stepper(net, 128);
    Tensor<float> out = stepper.run_all(x);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel("batch=128 T=8");
}
BENCHMARK(BM_early_stop_eval)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
