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

#ifndef ETTFS_NEURON_HPP_
#define ETTFS_NEURON_HPP_

#include <cmath>
#include <vector>

#include "ettfs/ops.hpp"

namespace ettfs {

enum class ChargeKind { kIF, kLIF };
enum class SurrogateKind { kArctan, kRectangular };
enum class RunMode { kTrain, kInfer };

// At-most-one-spike neuron bank configuration. One config describes a whole
// layer of neurons; it is immutable during a run and shareable.
//
// The surrogate replaces the Heaviside derivative in the backward pass; the
// hard step stays in the forward pass. smooth_forward additionally replaces
// the forward step with the surrogate's primitive, which makes the entire
// sequence differentiable -- that mode exists for gradient verification
// against finite differences, never for training.
struct AmosConfig {
  float v_threshold = 1.0f;
  ChargeKind charge = ChargeKind::kIF;
  float tau_m = 2.0f;   // LIF only, > 1
  float v_rest = 0.0f;  // LIF only
  SurrogateKind surrogate = SurrogateKind::kArctan;
  float surrogate_width = 2.0f;  // alpha for arctan, half-width for rectangular
  bool force_fire_last_step = true;
  bool smooth_forward = false;

  void validate() const {
    if (surrogate_width <= 0.0f) {
      throw ConfigError(msg("surrogate_width ", surrogate_width, " must be > 0"));
    }
    if (charge == ChargeKind::kLIF) {
      if (tau_m <= 1.0f) throw ConfigError(msg("tau_m ", tau_m, " must be > 1"));
      if (v_threshold <= v_rest) {
        throw ConfigError(msg("v_threshold ", v_threshold, " must exceed v_rest ",
                              v_rest));
      }
    }
  }
};

namespace surrogate {

template <typename S>
S grad(S u, S width, SurrogateKind kind) {
  if (kind == SurrogateKind::kArctan) {
    const S z = S(M_PI) / S(2) * width * u;
    return width / (S(2) * (S(1) + z * z));
  }
  return std::abs(u) < width ? S(1) / (S(2) * width) : S(0);
}

// Smooth stand-in for the step itself; its derivative is grad() above.
template <typename S>
S primitive(S u, S width, SurrogateKind kind) {
  if (kind == SurrogateKind::kArctan) {
    return S(0.5) + std::atan(S(M_PI) / S(2) * width * u) / S(M_PI);
  }
  return std::clamp((u + width) / (S(2) * width), S(0), S(1));
}

}  // namespace surrogate

// Hard threshold with surrogate backward: forward 1[h >= vth], backward
// routes surrogate::grad(h - vth) regardless of which side fired.
template <typename S>
Tensor<S> spike_threshold(const Tensor<S>& h, const AmosConfig& cfg) {
  const S vth = S(cfg.v_threshold);
  const S width = S(cfg.surrogate_width);
  Tensor<S> out(h.shape());
  if (cfg.smooth_forward) {
    for (int64_t i = 0; i < h.size(); ++i) {
      out.val()[i] = surrogate::primitive(h.val()[i] - vth, width, cfg.surrogate);
    }
  } else {
    for (int64_t i = 0; i < h.size(); ++i) {
      out.val()[i] = h.val()[i] >= vth ? S(1) : S(0);
    }
  }
  if (detail::tracing(h)) {
    active_tape<S>()->record(
        out, [hn = h.node(), on = out.node(), vth, width, kind = cfg.surrogate] {
          auto& g = detail::grad_buffer<S>(*hn);
          for (size_t i = 0; i < g.size(); ++i) {
            g[i] += on->grad[i] *
                    surrogate::grad(hn->val[i] - vth, width, kind);
          }
        });
  }
  return out;
}

// Per-neuron run state. F latches to 1 after the first spike and gates any
// further firing; it is monotone and exactly binary outside smooth_forward.
template <typename S>
struct AmosState {
  Tensor<S> h;  // membrane potential, never reset
  Tensor<S> f;  // firing mask

  explicit AmosState(const Shape& shape)
      : h(Tensor<S>::zeros(shape)), f(Tensor<S>::zeros(shape)) {}
};

// Charge stage: IF integrates the current, LIF leaks toward v_rest.
template <typename S>
Tensor<S> amos_charge(const Tensor<S>& h, const Tensor<S>& x_t,
                      const AmosConfig& cfg) {
  check_same_shape(h, x_t, "amos_charge");
  if (cfg.charge == ChargeKind::kIF) return add(h, x_t);
  const S inv_tau = S(1) / S(cfg.tau_m);
  // h + (1/tau) * (-(h - v_rest) + x)
  Tensor<S> decayed = mul_scalar(h, S(1) - inv_tau);
  Tensor<S> driven = mul_scalar(x_t, inv_tau);
  return add_scalar(add(decayed, driven), S(cfg.v_rest) * inv_tau);
}

// Fire stage: s = (1 - f_prev) * step(h - vth). The mask factor is a
// constant gate in the backward pass unless the mask itself is on the tape
// (smooth_forward test mode).
template <typename S>
Tensor<S> amos_fire(const Tensor<S>& h, const Tensor<S>& f_prev,
                    const AmosConfig& cfg) {
  Tensor<S> theta = spike_threshold(h, cfg);
  Tensor<S> gate = scalar_sub(S(1), f_prev);
  return mul(gate, theta);
}

// One time-step: charge, fire, mask update. Returns the spike slice and
// leaves the updated membrane/mask in `state`.
template <typename S>
Tensor<S> amos_step(AmosState<S>& state, const Tensor<S>& x_t,
                    const AmosConfig& cfg) {
  state.h = amos_charge(state.h, x_t, cfg);
  Tensor<S> s = amos_fire(state.h, state.f, cfg);
  if (cfg.smooth_forward) {
    state.f = add(state.f, s);  // differentiable mask chain
  } else {
    Tensor<S> f = state.f.clone();
    for (int64_t i = 0; i < f.size(); ++i) f.val()[i] += s.val()[i];
    state.f = f;
  }
  return s;
}

// Unrolls the bank over the leading time axis of x [T, B, features...].
// Train mode forces every silent neuron to fire at the last step
// (s' = s + 1 - f after the mask update), so each neuron emits exactly one
// spike; inference never forces and may stay silent.
template <typename S>
Tensor<S> amos_run_sequence(const Tensor<S>& x, const AmosConfig& cfg,
                            RunMode mode) {
  cfg.validate();
  if (x.rank() < 2 || x.dim(0) < 1) {
    throw ConfigError(
        msg("amos_run_sequence: need [T, B, ...] with T >= 1, got ",
            shape_str(x.shape())));
  }
  const int64_t t_len = x.dim(0);
  Shape slice_shape(x.shape().begin() + 1, x.shape().end());
  AmosState<S> state(slice_shape);
  std::vector<Tensor<S>> spikes;
  spikes.reserve(static_cast<size_t>(t_len));
  for (int64_t t = 0; t < t_len; ++t) {
    Tensor<S> x_t = slice_time(x, t);
    if (x_t.has_nan()) {
      throw NumericError(msg("amos_run_sequence: non-finite input at step ", t));
    }
    spikes.push_back(amos_step(state, x_t, cfg));
  }
  if (mode == RunMode::kTrain && cfg.force_fire_last_step) {
    spikes.back() = add(spikes.back(), scalar_sub(S(1), state.f));
  }
  return stack_time(spikes);
}

}  // namespace ettfs

#endif  // ETTFS_NEURON_HPP_
