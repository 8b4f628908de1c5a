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

#ifndef ETTFS_INIT_HPP_
#define ETTFS_INIT_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "ettfs/network.hpp"

namespace ettfs {

// ETTFS initialization draws W ~ U(-sqrt(3T/N), sqrt(3T/N)) so that the
// post-synaptic current of one-spike inputs has unit variance regardless of
// the number of time-steps. The Kaiming baseline U(-1/sqrt(N), 1/sqrt(N))
// leaves that variance at 1/(3T).
struct InitScheme {
  InitKind kind = InitKind::kEttfs;
  // Direct-current encodings feed the first synapse a non-spike signal the
  // unit-variance argument does not cover; fall back to Kaiming there.
  bool first_layer_kaiming = false;
};

inline double ettfs_bound(int64_t t, int64_t fan_in) {
  return std::sqrt(3.0 * double(t) / double(fan_in));
}

inline double kaiming_bound(int64_t fan_in) {
  return std::sqrt(1.0 / double(fan_in));
}

// std of U(-a, a) is a/sqrt(3); these are the per-layer normalization targets.
inline double ettfs_sigma(int64_t t, int64_t fan_in) {
  return std::sqrt(double(t) / double(fan_in));
}

inline double kaiming_sigma(int64_t fan_in) {
  return std::sqrt(1.0 / (3.0 * double(fan_in)));
}

template <typename S>
void init_weights(Network<S>& net, const InitScheme& scheme, uint64_t seed) {
  std::mt19937 rng(static_cast<uint32_t>(seed));
  const int64_t t = net.time_steps();
  bool first_synaptic = true;
  for (size_t i = 0; i < net.layer_count(); ++i) {
    Layer<S>& l = net.layer(i);
    if (!l.desc.synaptic()) continue;
    InitKind kind = scheme.kind;
    if (first_synaptic && scheme.first_layer_kaiming) kind = InitKind::kKaiming;
    first_synaptic = false;

    const double bound = kind == InitKind::kEttfs ? ettfs_bound(t, l.desc.fan_in)
                                                  : kaiming_bound(l.desc.fan_in);
    l.sigma_target = S(kind == InitKind::kEttfs ? ettfs_sigma(t, l.desc.fan_in)
                                                : kaiming_sigma(l.desc.fan_in));
    l.w = Tensor<S>::uniform(l.w.shape(), S(bound), rng);
    l.w.set_requires_grad(true);
    l.gamma = Tensor<S>::ones(l.gamma.shape());
    l.beta = Tensor<S>::zeros(l.beta.shape());
    if (net.norm() == NormMode::kAffine) {
      l.gamma.set_requires_grad(true);
      l.beta.set_requires_grad(true);
    }
  }
  net.set_init_kind(scheme.kind);
}

// Bakes the training-path math into synapse weights and biases:
// w_eff = gamma (per output unit) * standardize(w), b_eff = beta. The result
// accepts inference only.
template <typename S>
void fuse_for_inference(Network<S>& net) {
  net.refresh_effective();
  net.mark_fused();
}

}  // namespace ettfs

#endif  // ETTFS_INIT_HPP_
