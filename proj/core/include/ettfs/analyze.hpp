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

#ifndef ETTFS_ANALYZE_HPP_
#define ETTFS_ANALYZE_HPP_

#include <string>
#include <vector>

#include "ettfs/decode.hpp"
#include "ettfs/network.hpp"

namespace ettfs {

// Per-synaptic-layer signal and gradient statistics, the raw material for
// the current-distribution and gradient-scale plots.
struct LayerStats {
  int64_t layer = 0;
  // post-synaptic current X over all (t, batch, unit) entries
  double x_mean = 0.0, x_var = 0.0;
  std::vector<double> x_edges;
  std::vector<int64_t> x_counts;
  // dL/dW for the layer's weights
  double g_mean_abs = 0.0, g_std = 0.0;
  std::vector<double> g_edges;
  std::vector<int64_t> g_counts;
};

struct AnalyzeOptions {
  int64_t batches = 8;
  int64_t batch_size = 32;
  RunMode mode = RunMode::kTrain;  // propagation regime for the X statistics
  uint64_t seed = 7;
  int64_t hist_bins = 64;
};

// Drives random one-spike batches through the network (X statistics in the
// requested mode) and one train-mode backward pass from an MSE loss against
// random labels (gradient statistics).
std::vector<LayerStats> analyze_network(Network<float>& net,
                                        const DecodeWeights& dw,
                                        const AnalyzeOptions& opts);

// Random input where every unit fires exactly once, uniformly over time.
SpikeTensor<float> random_one_spike_input(const Shape& item_shape, int64_t t,
                                          int64_t batch, std::mt19937& rng);

// One JSON object per line: {"layer", "stat", "mean"/"variance" or
// "mean_abs"/"std", "bin_edges", "counts"}.
void write_analysis(const std::string& path, const std::vector<LayerStats>& stats);

}  // namespace ettfs

#endif  // ETTFS_ANALYZE_HPP_
