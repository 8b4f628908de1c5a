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

#include "ettfs/analyze.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "ettfs/tape.hpp"

namespace ettfs {
namespace {

constexpr size_t kHistSampleCap = 1 << 18;  // per layer, keeps memory flat

struct Moments {
  double sum = 0.0, sumsq = 0.0, sum_abs = 0.0;
  int64_t n = 0;
  std::vector<float> sample;  // capped, for the histogram only

  void add(const std::vector<float>& values) {
    for (float v : values) {
      sum += v;
      sumsq += double(v) * double(v);
      sum_abs += std::abs(double(v));
    }
    n += static_cast<int64_t>(values.size());
    const size_t room = kHistSampleCap - std::min(kHistSampleCap, sample.size());
    const size_t take = std::min(room, values.size());
    sample.insert(sample.end(), values.begin(), values.begin() + ptrdiff_t(take));
  }

  double mean() const { return n ? sum / double(n) : 0.0; }
  double mean_abs() const { return n ? sum_abs / double(n) : 0.0; }
  double var() const {
    if (!n) return 0.0;
    const double m = mean();
    return sumsq / double(n) - m * m;
  }
};

void histogram(const std::vector<float>& values, int64_t bins,
               std::vector<double>& edges, std::vector<int64_t>& counts) {
  edges.assign(size_t(bins + 1), 0.0);
  counts.assign(size_t(bins), 0);
  if (values.empty()) return;
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) hi = lo + 1.0;
  for (int64_t i = 0; i <= bins; ++i) {
    edges[size_t(i)] = lo + (hi - lo) * double(i) / double(bins);
  }
  for (float v : values) {
    int64_t b = int64_t((double(v) - lo) / (hi - lo) * double(bins));
    b = std::clamp<int64_t>(b, 0, bins - 1);
    ++counts[size_t(b)];
  }
}

}  // namespace

SpikeTensor<float> random_one_spike_input(const Shape& item_shape, int64_t t,
                                          int64_t batch, std::mt19937& rng) {
  Shape shape{t, batch};
  shape.insert(shape.end(), item_shape.begin(), item_shape.end());
  Tensor<float> values(shape);
  const int64_t feat = numel(item_shape);
  std::uniform_int_distribution<int64_t> when(0, t - 1);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t i = 0; i < feat; ++i) {
      values.val()[size_t((when(rng) * batch + b) * feat + i)] = 1.0f;
    }
  }
  return SpikeTensor<float>{values, true, true};
}

std::vector<LayerStats> analyze_network(Network<float>& net,
                                        const DecodeWeights& dw,
                                        const AnalyzeOptions& opts) {
  std::mt19937 rng(static_cast<uint32_t>(opts.seed));
  const size_t n_layers = size_t(net.spec().synaptic_count());
  std::vector<Moments> x_moments(n_layers);

  auto observer = [&](size_t layer, const Tensor<float>& current) {
    x_moments[layer].add(current.val());
  };

  for (int64_t b = 0; b < opts.batches; ++b) {
    SpikeTensor<float> input = random_one_spike_input(
        net.spec().input_shape, net.time_steps(), opts.batch_size, rng);
    net.forward(input, opts.mode, observer);
  }

  // One train-mode backward pass from an MSE loss against random labels.
  std::vector<Moments> g_moments(n_layers);
  {
    SpikeTensor<float> input = random_one_spike_input(
        net.spec().input_shape, net.time_steps(), opts.batch_size, rng);
    std::uniform_int_distribution<int> lab(0, int(net.spec().num_classes()) - 1);
    std::vector<int> labels(size_t(opts.batch_size));
    for (auto& l : labels) l = lab(rng);
    Tape<float> tape;
    TapeScope<float> scope(tape);
    SpikeTensor<float> out = net.forward(input, RunMode::kTrain);
    Tensor<float> loss = mse_loss(decode(out.values, dw), labels, dw);
    tape.backward(loss);
    size_t li = 0;
    for (size_t i = 0; i < net.layer_count(); ++i) {
      Layer<float>& l = net.layer(i);
      if (!l.desc.synaptic()) continue;
      if (l.w.has_grad()) g_moments[li].add(l.w.grad());
      l.w.zero_grad();
      ++li;
    }
  }

  std::vector<LayerStats> stats(n_layers);
  for (size_t i = 0; i < n_layers; ++i) {
    stats[i].layer = int64_t(i);
    stats[i].x_mean = x_moments[i].mean();
    stats[i].x_var = x_moments[i].var();
    histogram(x_moments[i].sample, opts.hist_bins, stats[i].x_edges,
              stats[i].x_counts);
    stats[i].g_mean_abs = g_moments[i].mean_abs();
    stats[i].g_std = std::sqrt(g_moments[i].var());
    histogram(g_moments[i].sample, opts.hist_bins, stats[i].g_edges,
              stats[i].g_counts);
  }
  return stats;
}

void write_analysis(const std::string& path,
                    const std::vector<LayerStats>& stats) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError(msg("cannot write ", path));
  for (const auto& s : stats) {
    nlohmann::json x = {{"layer", s.layer},      {"stat", "current"},
                        {"mean", s.x_mean},      {"variance", s.x_var},
                        {"bin_edges", s.x_edges}, {"counts", s.x_counts}};
    nlohmann::json g = {{"layer", s.layer},       {"stat", "weight_grad"},
                        {"mean_abs", s.g_mean_abs}, {"std", s.g_std},
                        {"bin_edges", s.g_edges},  {"counts", s.g_counts}};
    out << x.dump() << "\n" << g.dump() << "\n";
  }
}

}  // namespace ettfs
