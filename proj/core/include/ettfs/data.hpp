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

#ifndef ETTFS_DATA_HPP_
#define ETTFS_DATA_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ettfs/spike.hpp"

namespace ettfs {

// Images as raw bytes, labels one byte each. item_shape is [C, H, W]
// (C = 1 for the IDX sets, 3 for CIFAR10).
struct Dataset {
  std::vector<uint8_t> images;
  std::vector<uint8_t> labels;
  Shape item_shape;
  int64_t count = 0;

  int64_t item_bytes() const { return numel(item_shape); }
  const uint8_t* image(int64_t i) const {
    return images.data() + i * item_bytes();
  }
};

// Big-endian IDX pair (0x00000803 image magic, 0x00000801 label magic).
// Truncation or count mismatch reports the failing byte offset.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// CIFAR10 binary batches: data_batch_{1..5}.bin for train, test_batch.bin
// for test; 3073-byte records (label + 3x32x32).
Dataset load_cifar10(const std::string& dir, bool train);

// Resolves <data_dir>/<name>/<standard file names> for mnist / fashion /
// cifar10. Throws FormatError naming the missing file.
Dataset load_named_dataset(const std::string& name, const std::string& data_dir,
                           bool train);

enum class EncoderKind { kLatency, kDirect };

struct Encoder {
  EncoderKind kind = EncoderKind::kLatency;
  int64_t t = 8;
};

// Latency code: pixel p fires exactly once, at t = (255 - p) * (T - 1) / 255
// (integer floor). Bright pixels fire first, p = 0 fires at the last step,
// and every unit emits exactly one spike.
template <typename S>
SpikeTensor<S> encode_latency_batch(const Dataset& data,
                                    const std::vector<int64_t>& indices,
                                    int64_t t) {
  if (t < 2) throw ConfigError(msg("latency encoding needs T >= 2, got ", t));
  const int64_t batch = static_cast<int64_t>(indices.size());
  const int64_t feat = data.item_bytes();
  Shape shape{t, batch};
  shape.insert(shape.end(), data.item_shape.begin(), data.item_shape.end());
  Tensor<S> out(shape);
  for (int64_t b = 0; b < batch; ++b) {
    const uint8_t* img = data.image(indices[size_t(b)]);
    for (int64_t i = 0; i < feat; ++i) {
      const int64_t fire_at = (int64_t(255 - img[i]) * (t - 1)) / 255;
      out.val()[size_t((fire_at * batch + b) * feat + i)] = S(1);
    }
  }
  return SpikeTensor<S>{out, true, true};
}

// Direct current: intensity p/255 applied at every time-step.
template <typename S>
SpikeTensor<S> encode_direct_batch(const Dataset& data,
                                   const std::vector<int64_t>& indices,
                                   int64_t t) {
  if (t < 1) throw ConfigError(msg("direct encoding needs T >= 1, got ", t));
  const int64_t batch = static_cast<int64_t>(indices.size());
  const int64_t feat = data.item_bytes();
  Shape shape{t, batch};
  shape.insert(shape.end(), data.item_shape.begin(), data.item_shape.end());
  Tensor<S> out(shape);
  for (int64_t b = 0; b < batch; ++b) {
    const uint8_t* img = data.image(indices[size_t(b)]);
    for (int64_t i = 0; i < feat; ++i) {
      const S v = S(img[i]) / S(255);
      for (int64_t step = 0; step < t; ++step) {
        out.val()[size_t((step * batch + b) * feat + i)] = v;
      }
    }
  }
  return SpikeTensor<S>{out, false, false};
}

template <typename S>
SpikeTensor<S> encode_batch(const Dataset& data,
                            const std::vector<int64_t>& indices,
                            const Encoder& enc) {
  return enc.kind == EncoderKind::kLatency
             ? encode_latency_batch<S>(data, indices, enc.t)
             : encode_direct_batch<S>(data, indices, enc.t);
}

// Single-image conveniences: [T, 1, C, H, W].
template <typename S>
SpikeTensor<S> encode_latency(const Dataset& data, int64_t index, int64_t t) {
  return encode_latency_batch<S>(data, {index}, t);
}

template <typename S>
SpikeTensor<S> encode_direct(const Dataset& data, int64_t index, int64_t t) {
  return encode_direct_batch<S>(data, {index}, t);
}

}  // namespace ettfs

#endif  // ETTFS_DATA_HPP_
