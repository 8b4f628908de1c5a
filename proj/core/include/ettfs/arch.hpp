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

#ifndef ETTFS_ARCH_HPP_
#define ETTFS_ARCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ettfs/tensor.hpp"

namespace ettfs {

enum class LayerKind { kFC, kConv, kAvgPool, kMaxPool, kFlatten };
enum class PoolKind { kAvg, kMax };

// One structural layer, fully shaped. Shapes are per-item: [N] for flat
// signals, [C, H, W] for spatial ones; time and batch axes are implicit.
struct LayerDesc {
  LayerKind kind = LayerKind::kFC;
  int64_t out_features = 0;              // FC
  int64_t out_channels = 0, kernel = 0;  // conv
  int64_t stride = 1;                    // conv
  int64_t pool_size = 0;                 // pools
  Shape in_shape, out_shape;
  int64_t fan_in = 0;  // synaptic layers: N (FC) or C_in * kh * kw (conv)

  bool synaptic() const {
    return kind == LayerKind::kFC || kind == LayerKind::kConv;
  }
};

struct NetworkSpec {
  std::vector<LayerDesc> layers;
  int64_t t = 0;
  Shape input_shape;

  int64_t num_classes() const {
    return layers.empty() ? 0 : numel(layers.back().out_shape);
  }
  int64_t synaptic_count() const {
    int64_t n = 0;
    for (const auto& l : layers) n += l.synaptic() ? 1 : 0;
    return n;
  }
};

// Parses the dash-separated architecture notation:
//   FC<n>           fully-connected, n output features
//   C<m>K<n>        convolution, m output channels, n x n kernel, stride 1
//   P<n>            pooling, n x n window, stride n (avg or max per flag)
//   {...}*<n>       the group repeated n times, nesting allowed
// e.g. "C16K5-P2-C32K5-P2-FC128-FC10", "{FC400}*2-FC10".
//
// A flatten stage is inserted automatically where a spatial signal meets the
// first FC layer. Shape errors and malformed tokens report the character
// position in the input string.
NetworkSpec parse_arch(const std::string& s, const Shape& input_shape,
                       int64_t t, PoolKind pool = PoolKind::kAvg);

// Expanded textual form (repeats unrolled, flatten omitted); parses back to
// an identical spec.
std::string render_arch(const NetworkSpec& spec);

}  // namespace ettfs

#endif  // ETTFS_ARCH_HPP_
