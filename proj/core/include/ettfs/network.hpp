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

#ifndef ETTFS_NETWORK_HPP_
#define ETTFS_NETWORK_HPP_

#include <cassert>
#include <cstdio>
#include <functional>
#include <vector>

#include "ettfs/arch.hpp"
#include "ettfs/conv.hpp"
#include "ettfs/neuron.hpp"
#include "ettfs/spike.hpp"

namespace ettfs {

// Training-time treatment of synapse weights: raw, standardized, or
// standardized with a learnable per-feature affine on the synaptic output.
enum class NormMode { kOff, kPlain, kAffine };

enum class InitKind { kEttfs, kKaiming };

template <typename S>
struct Layer {
  LayerDesc desc;
  Tensor<S> w;                // FC: [N, M]; conv: [O, C, kh, kw]
  Tensor<S> gamma, beta;      // per output feature/channel
  S sigma_target = S(0);      // std of the initial weight distribution
  Tensor<S> w_eff, b_eff;     // inference-path parameters
  bool has_bias_eff = false;
};

// A stack of spiking layers sharing one neuron config. Weights are shared
// across all T time-steps of a forward pass; the training path applies
// weight standardization (and the affine) on the tape so gradients flow
// through the statistics, while the inference path folds everything into
// w_eff/b_eff once.
template <typename S>
class Network {
 public:
  static constexpr S kNormEps = S(1e-5);

  Network(NetworkSpec spec, AmosConfig amos, NormMode norm)
      : spec_(std::move(spec)), amos_(amos), norm_(norm) {
    amos_.validate();
    for (const LayerDesc& d : spec_.layers) {
      Layer<S> l;
      l.desc = d;
      if (d.kind == LayerKind::kFC) {
        l.w = Tensor<S>::zeros({d.fan_in, d.out_features});
        l.gamma = Tensor<S>::ones({d.out_features});
        l.beta = Tensor<S>::zeros({d.out_features});
      } else if (d.kind == LayerKind::kConv) {
        l.w = Tensor<S>::zeros({d.out_channels, d.in_shape[0], d.kernel, d.kernel});
        l.gamma = Tensor<S>::ones({d.out_channels});
        l.beta = Tensor<S>::zeros({d.out_channels});
      }
      layers_.push_back(std::move(l));
    }
  }

  const NetworkSpec& spec() const { return spec_; }
  const AmosConfig& amos() const { return amos_; }
  AmosConfig& amos() { return amos_; }
  NormMode norm() const { return norm_; }
  bool fused() const { return fused_; }
  int64_t time_steps() const { return spec_.t; }

  size_t layer_count() const { return layers_.size(); }
  Layer<S>& layer(size_t i) { return layers_[i]; }
  const Layer<S>& layer(size_t i) const { return layers_[i]; }

  InitKind init_kind() const { return init_kind_; }
  void set_init_kind(InitKind k) { init_kind_ = k; }

  void mark_fused() { fused_ = true; }

  std::vector<Tensor<S>> parameters() {
    std::vector<Tensor<S>> params;
    for (auto& l : layers_) {
      if (!l.desc.synaptic()) continue;
      params.push_back(l.w);
      if (norm_ == NormMode::kAffine) {
        params.push_back(l.gamma);
        params.push_back(l.beta);
      }
    }
    return params;
  }

  // Observes the post-synaptic current entering each neuron bank;
  // first argument is the synaptic layer index.
  using CurrentObserver = std::function<void(size_t, const Tensor<S>&)>;

  // Layer-by-layer forward over the full sequence. Train mode runs the
  // normalization/affine path and forces last-step firing; infer mode uses
  // the folded parameters and may leave neurons silent.
  SpikeTensor<S> forward(const SpikeTensor<S>& input, RunMode mode,
                         const CurrentObserver& observe_current = nullptr) {
    if (mode == RunMode::kTrain && fused_) {
      throw UsageError("forward: network is fused for inference only");
    }
    if (mode == RunMode::kInfer && !fused_) refresh_effective();
    check_input(input.values);

    Tensor<S> x = input.values;
    bool binary = input.binary;
    bool unit_sum = input.unit_time_sum;
    size_t synaptic_idx = 0;
    for (auto& l : layers_) {
      switch (l.desc.kind) {
        case LayerKind::kFlatten:
          x = flatten_features(x);
          break;
        case LayerKind::kAvgPool:
          x = avg_pool2d(x, l.desc.pool_size);
          binary = false;  // fractional currents, unit time-sum preserved
          break;
        case LayerKind::kMaxPool:
          warn_max_pool();
          x = max_pool2d(x, l.desc.pool_size);
          unit_sum = false;  // several window members may fire at distinct steps
          break;
        case LayerKind::kFC:
        case LayerKind::kConv: {
          Tensor<S> current = mode == RunMode::kTrain ? synapse_train(l, x)
                                                      : synapse_infer(l, x);
          if (observe_current) observe_current(synaptic_idx, current);
          ++synaptic_idx;
          x = amos_run_sequence(current, amos_, mode);
          binary = !amos_.smooth_forward;
          unit_sum = mode == RunMode::kTrain;
#ifndef NDEBUG
          if (mode == RunMode::kTrain && !amos_.smooth_forward) {
            for (S v : time_sums(x)) assert(v == S(1));
          }
#endif
          break;
        }
      }
    }
    return SpikeTensor<S>{x, binary, unit_sum};
  }

  // Recomputes w_eff/b_eff from the current parameters: standardization and
  // the affine folded into the synapse, matching the training-path math.
  void refresh_effective() {
    for (auto& l : layers_) {
      if (!l.desc.synaptic()) continue;
      if (norm_ == NormMode::kOff) {
        l.w_eff = l.w;
        l.has_bias_eff = false;
        continue;
      }
      l.w_eff = standardized_values(l.w, l.sigma_target, kNormEps);
      if (norm_ == NormMode::kAffine) {
        scale_per_output(l);
        l.b_eff = l.beta.clone();
        l.has_bias_eff = true;
      } else {
        l.has_bias_eff = false;
      }
    }
  }

  // Plain (off-tape) version of the training-path weight standardization.
  static Tensor<S> standardized_values(const Tensor<S>& w, S sigma_target,
                                       S eps) {
    const int64_t n = w.size();
    S mean = S(0);
    for (S v : w.val()) mean += v;
    mean /= S(n);
    S var = S(0);
    for (S v : w.val()) var += (v - mean) * (v - mean);
    var /= S(n);
    const S inv_std = S(1) / std::sqrt(var + eps);
    Tensor<S> out(w.shape());
    for (int64_t i = 0; i < n; ++i) {
      out.val()[i] = (w.val()[i] - mean) * inv_std * sigma_target;
    }
    return out;
  }

 private:
  void check_input(const Tensor<S>& x) const {
    const bool rank_ok = x.rank() >= 3;
    Shape item;
    if (rank_ok) item.assign(x.shape().begin() + 2, x.shape().end());
    if (!rank_ok || x.dim(0) != spec_.t || item != spec_.input_shape) {
      throw ShapeError(msg("forward: input ", shape_str(x.shape()),
                           " does not match [T=", spec_.t, ", B, ",
                           shape_str(spec_.input_shape), "]"));
    }
  }

  Tensor<S> synapse_train(Layer<S>& l, const Tensor<S>& x) {
    Tensor<S> w_used = l.w;
    if (norm_ != NormMode::kOff) {
      w_used = standardize_to(l.w, l.sigma_target, kNormEps);
    }
    Tensor<S> current = l.desc.kind == LayerKind::kFC
                            ? linear(x, w_used)
                            : conv2d(x, w_used, l.desc.stride);
    if (norm_ == NormMode::kAffine) {
      current = affine_features(current, l.gamma, l.beta, 2);
    }
    return current;
  }

  Tensor<S> synapse_infer(Layer<S>& l, const Tensor<S>& x) {
    const Tensor<S>* bias = l.has_bias_eff ? &l.b_eff : nullptr;
    return l.desc.kind == LayerKind::kFC
               ? linear(x, l.w_eff, bias)
               : conv2d(x, l.w_eff, l.desc.stride, 0, bias);
  }

  // gamma folds into the synapse per output unit: FC columns, conv filters.
  void scale_per_output(Layer<S>& l) {
    if (l.desc.kind == LayerKind::kFC) {
      const int64_t n = l.desc.fan_in, m = l.desc.out_features;
      for (int64_t i = 0; i < n; ++i) {
        for (int64_t j = 0; j < m; ++j) l.w_eff.val()[i * m + j] *= l.gamma.val()[j];
      }
    } else {
      const int64_t per_filter = l.w_eff.size() / l.desc.out_channels;
      for (int64_t o = 0; o < l.desc.out_channels; ++o) {
        for (int64_t i = 0; i < per_filter; ++i) {
          l.w_eff.val()[o * per_filter + i] *= l.gamma.val()[o];
        }
      }
    }
  }

  void warn_max_pool() {
    if (warned_max_pool_ || init_kind_ != InitKind::kEttfs) return;
    warned_max_pool_ = true;
    std::fprintf(stderr,
                 "warning: max-pooling can emit several spikes per unit over "
                 "time, which breaks the one-spike assumption this "
                 "initialization relies on; prefer average pooling\n");
  }

  NetworkSpec spec_;
  AmosConfig amos_;
  NormMode norm_;
  std::vector<Layer<S>> layers_;
  InitKind init_kind_ = InitKind::kEttfs;
  bool fused_ = false;
  bool warned_max_pool_ = false;
};

}  // namespace ettfs

#endif  // ETTFS_NETWORK_HPP_
