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

#ifndef ETTFS_CHECKPOINT_HPP_
#define ETTFS_CHECKPOINT_HPP_

#include <string>

#include "ettfs/data.hpp"
#include "ettfs/decode.hpp"
#include "ettfs/init.hpp"
#include "ettfs/network.hpp"

namespace ettfs {

// Run configuration that travels with the weights so a checkpoint can be
// evaluated without repeating the training flags.
struct RunSettings {
  InitKind init = InitKind::kEttfs;
  DecayMode decode_mode = DecayMode::kExponential;
  double decode_gamma = 2.0;
  EncoderKind encoder = EncoderKind::kLatency;
};

// Binary container, bit-exact round trip:
//   8-byte magic "ETTFSCKP"
//   u32 LE format version (currently 1)
//   u32 LE metadata length, then that many bytes of JSON text
//     (architecture string, input shape, T, neuron config, norm mode,
//      per-layer sigma targets, fused flag, decode/encoder settings)
//   per layer, in declaration order: float32 LE blobs, each prefixed with a
//   u64 LE byte length. Unfused: W, gamma, beta. Fused: W_eff, B_eff.
void save_checkpoint(const Network<float>& net, const RunSettings& settings,
                     const std::string& path);

struct LoadedCheckpoint {
  Network<float> net;
  RunSettings settings;
};

// Magic/version mismatches and blob-length mismatches raise FormatError.
// A fused checkpoint loads into a network that rejects train-mode forwards.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace ettfs

#endif  // ETTFS_CHECKPOINT_HPP_
