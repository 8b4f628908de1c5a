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

#ifndef ETTFS_SPIKE_HPP_
#define ETTFS_SPIKE_HPP_

#include "ettfs/tensor.hpp"

namespace ettfs {

// The inter-layer signal: values laid out [T, B, features...] plus what is
// known about them. Binary one-spike trains satisfy both flags; average
// pooling trades `binary` away while keeping the unit time-sum; direct
// current encoding has neither.
template <typename S>
struct SpikeTensor {
  Tensor<S> values;
  bool binary = true;
  bool unit_time_sum = true;  // sum over the time axis is 1 per unit

  int64_t time_steps() const { return values.dim(0); }
  int64_t batch() const { return values.dim(1); }
};

// Sum over the leading time axis for every (batch, unit); used by the
// one-spike invariant checks.
template <typename S>
std::vector<S> time_sums(const Tensor<S>& v) {
  const int64_t t_len = v.dim(0);
  const int64_t stride = v.size() / t_len;
  std::vector<S> sums(static_cast<size_t>(stride), S(0));
  for (int64_t t = 0; t < t_len; ++t) {
    const S* src = v.data() + t * stride;
    for (int64_t i = 0; i < stride; ++i) sums[static_cast<size_t>(i)] += src[i];
  }
  return sums;
}

}  // namespace ettfs

#endif  // ETTFS_SPIKE_HPP_
