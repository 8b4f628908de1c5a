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

#ifndef ETTFS_DECODE_HPP_
#define ETTFS_DECODE_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "ettfs/ops.hpp"

namespace ettfs {

enum class DecayMode { kExponential, kLinear };

constexpr int kUndecided = -1;

// Strictly decreasing temporal weights: exponential w[t] = gamma^-t (so
// w[0] = 1) or linear w[t] = gamma * (T - t) / T. Earlier spikes decode to
// larger values, which is what pushes training toward early firing.
struct DecodeWeights {
  DecayMode mode = DecayMode::kExponential;
  double gamma = 2.0;
  int64_t t = 0;
  std::vector<double> w;

  static DecodeWeights make(DecayMode mode, double gamma, int64_t t) {
    if (t < 1) throw ConfigError(msg("decode: T ", t, " < 1"));
    if (mode == DecayMode::kExponential && !(gamma > 1.0)) {
      throw ConfigError(
          msg("decode: exponential decay needs gamma > 1, got ", gamma));
    }
    if (mode == DecayMode::kLinear && !(gamma > 0.0)) {
      throw ConfigError(msg("decode: linear decay needs gamma > 0, got ", gamma));
    }
    DecodeWeights dw;
    dw.mode = mode;
    dw.gamma = gamma;
    dw.t = t;
    dw.w.resize(static_cast<size_t>(t));
    for (int64_t i = 0; i < t; ++i) {
      dw.w[static_cast<size_t>(i)] =
          mode == DecayMode::kExponential
              ? std::pow(gamma, -double(i))
              : gamma * double(t - i) / double(t);
    }
    for (int64_t i = 0; i + 1 < t; ++i) {
      if (!(dw.w[size_t(i)] > dw.w[size_t(i + 1)])) {
        throw ConfigError(msg("decode: weights not strictly decreasing at t=", i));
      }
    }
    return dw;
  }

  template <typename S>
  std::vector<S> as() const {
    std::vector<S> out(w.size());
    for (size_t i = 0; i < w.size(); ++i) out[i] = S(w[i]);
    return out;
  }
};

// Y[b,c] = sum_t w[t] * O[t,b,c]; linear in O and differentiable, unlike the
// inference-time earliest-spike rule.
template <typename S>
Tensor<S> decode(const Tensor<S>& o, const DecodeWeights& dw) {
  if (o.rank() != 3 || o.dim(0) != dw.t) {
    throw ShapeError(msg("decode: output ", shape_str(o.shape()),
                         " does not match T=", dw.t));
  }
  return temporal_weighted_sum(o, dw.as<S>());
}

// Earliest-spike classification: argmin over classes of the first firing
// time. Ties break toward the lowest class index; samples with no output
// spike at all return kUndecided.
template <typename S>
std::vector<int> predict_earliest(const Tensor<S>& o) {
  if (o.rank() != 3) {
    throw ShapeError(msg("predict_earliest: want [T,B,C], got ",
                         shape_str(o.shape())));
  }
  const int64_t t_len = o.dim(0), batch = o.dim(1), classes = o.dim(2);
  std::vector<int> pred(static_cast<size_t>(batch), kUndecided);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t t = 0; t < t_len && pred[size_t(b)] == kUndecided; ++t) {
      const S* row = o.data() + (t * batch + b) * classes;
      for (int64_t c = 0; c < classes; ++c) {
        if (row[c] > S(0)) {
          pred[size_t(b)] = static_cast<int>(c);
          break;
        }
      }
    }
  }
  return pred;
}

template <typename S>
std::vector<int> argmax_classes(const Tensor<S>& y) {
  const int64_t batch = y.dim(0), classes = y.dim(1);
  std::vector<int> out(static_cast<size_t>(batch));
  for (int64_t b = 0; b < batch; ++b) {
    const S* row = y.data() + b * classes;
    int best = 0;
    for (int64_t c = 1; c < classes; ++c) {
      if (row[c] > row[best]) best = static_cast<int>(c);
    }
    out[size_t(b)] = best;
  }
  return out;
}

// Mean squared error against per-class targets built from the decode
// weights: the true class should decode like a t=0 spike (w[0]) and every
// other class like a last-step forced spike (w[T-1]) -- the smallest value
// a one-spike output row can actually attain.
template <typename S>
Tensor<S> mse_loss(const Tensor<S>& y, const std::vector<int>& labels,
                   const DecodeWeights& dw) {
  const int64_t batch = y.dim(0), classes = y.dim(1);
  if (y.rank() != 2 || static_cast<int64_t>(labels.size()) != batch) {
    throw ShapeError(msg("mse_loss: scores ", shape_str(y.shape()), " vs ",
                         labels.size(), " labels"));
  }
  const S hi = S(dw.w.front()), lo = S(dw.w.back());
  auto target = std::make_shared<std::vector<S>>(y.val().size(), lo);
  for (int64_t b = 0; b < batch; ++b) {
    const int lab = labels[size_t(b)];
    if (lab < 0 || lab >= classes) {
      throw UsageError(msg("mse_loss: label ", lab, " out of range [0,",
                           classes, ")"));
    }
    (*target)[size_t(b * classes + lab)] = hi;
  }
  S acc = S(0);
  for (size_t i = 0; i < target->size(); ++i) {
    const S d = y.val()[i] - (*target)[i];
    acc += d * d;
  }
  const S inv_n = S(1) / S(y.size());
  Tensor<S> out = Tensor<S>::scalar(acc * inv_n);
  if (detail::tracing(y)) {
    active_tape<S>()->record(out, [yn = y.node(), on = out.node(), target,
                                   inv_n] {
      auto& g = detail::grad_buffer<S>(*yn);
      const S up = on->grad[0];
      for (size_t i = 0; i < g.size(); ++i) {
        g[i] += up * S(2) * (yn->val[i] - (*target)[i]) * inv_n;
      }
    });
  }
  return out;
}

// Softmax cross-entropy, mean over the batch.
template <typename S>
Tensor<S> cross_entropy_loss(const Tensor<S>& y, const std::vector<int>& labels) {
  const int64_t batch = y.dim(0), classes = y.dim(1);
  if (y.rank() != 2 || static_cast<int64_t>(labels.size()) != batch) {
    throw ShapeError(msg("cross_entropy_loss: scores ", shape_str(y.shape()),
                         " vs ", labels.size(), " labels"));
  }
  auto softmax = std::make_shared<std::vector<S>>(y.val().size());
  S loss = S(0);
  for (int64_t b = 0; b < batch; ++b) {
    const int lab = labels[size_t(b)];
    if (lab < 0 || lab >= classes) {
      throw UsageError(msg("cross_entropy_loss: label ", lab,
                           " out of range [0,", classes, ")"));
    }
    const S* row = y.data() + b * classes;
    S* soft = softmax->data() + b * classes;
    S max_v = row[0];
    for (int64_t c = 1; c < classes; ++c) max_v = std::max(max_v, row[c]);
    S denom = S(0);
    for (int64_t c = 0; c < classes; ++c) {
      soft[c] = std::exp(row[c] - max_v);
      denom += soft[c];
    }
    for (int64_t c = 0; c < classes; ++c) soft[c] /= denom;
    loss -= std::log(std::max(soft[lab], S(1e-30)));
  }
  const S inv_b = S(1) / S(batch);
  Tensor<S> out = Tensor<S>::scalar(loss * inv_b);
  if (detail::tracing(y)) {
    auto labels_copy = std::make_shared<std::vector<int>>(labels);
    active_tape<S>()->record(
        out, [yn = y.node(), on = out.node(), softmax, labels_copy, inv_b,
              classes] {
          auto& g = detail::grad_buffer<S>(*yn);
          const S up = on->grad[0] * inv_b;
          const int64_t batch = static_cast<int64_t>(labels_copy->size());
          for (int64_t b = 0; b < batch; ++b) {
            for (int64_t c = 0; c < classes; ++c) {
              const S onehot =
                  c == (*labels_copy)[size_t(b)] ? S(1) : S(0);
              g[size_t(b * classes + c)] +=
                  up * ((*softmax)[size_t(b * classes + c)] - onehot);
            }
          }
        });
  }
  return out;
}

}  // namespace ettfs

#endif  // ETTFS_DECODE_HPP_
