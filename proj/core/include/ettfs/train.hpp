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

#ifndef ETTFS_TRAIN_HPP_
#define ETTFS_TRAIN_HPP_

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ettfs/checkpoint.hpp"
#include "ettfs/data.hpp"
#include "ettfs/decode.hpp"
#include "ettfs/network.hpp"

namespace ettfs {

enum class OptimizerKind { kSgdMomentum, kAdamW };
enum class LrSchedule { kConstant, kWarmupCosine };
enum class LossKind { kMse, kCrossEntropy };
enum class EvalMode { kFixedT, kEarlyStop };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdamW;
  double lr = 1e-3;
  double momentum = 0.9;  // SGD
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // AdamW
  double weight_decay = 0.0;  // L2 for SGD, decoupled for AdamW
};

struct TrainConfig {
  int64_t epochs = 100;
  int64_t batch_size = 128;
  OptimizerConfig opt;
  LrSchedule schedule = LrSchedule::kConstant;
  double warmup_frac = 0.05;  // of total steps, for warmup-cosine
  double lr_floor = 1e-6;
  LossKind loss = LossKind::kMse;
  double grad_clip = 0.0;  // global-norm clip when > 0
  uint64_t seed = 1;

  void validate() const {
    if (opt.lr <= 0) throw ConfigError(msg("lr ", opt.lr, " must be > 0"));
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
  }
};

struct Metrics {
  int64_t epoch = 0;
  double train_acc = 0.0;
  double test_acc = 0.0;
  double loss = 0.0;
  double avg_infer_steps = 0.0;
  double lr = 0.0;
  int64_t wall_ms = 0;
};

// One JSON object per line; append-only so interrupted runs keep history.
inline void append_metrics(const std::string& path, const Metrics& m) {
  std::FILE* f = std::fopen(path.c_str(), "a");
  if (f == nullptr) throw FormatError(msg("cannot append metrics to ", path));
  std::fprintf(f,
               "{\"epoch\":%lld,\"train_acc\":%.6f,\"test_acc\":%.6f,"
               "\"loss\":%.8f,\"avg_infer_steps\":%.4f,\"lr\":%.8g,"
               "\"wall_ms\":%lld}\n",
               static_cast<long long>(m.epoch), m.train_acc, m.test_acc,
               m.loss, m.avg_infer_steps, m.lr,
               static_cast<long long>(m.wall_ms));
  std::fclose(f);
}

inline double scheduled_lr(const TrainConfig& cfg, int64_t step,
                           int64_t total_steps) {
  if (cfg.schedule == LrSchedule::kConstant) return cfg.opt.lr;
  const double warmup = std::max<double>(1.0, cfg.warmup_frac * total_steps);
  if (step < warmup) {
    const double f = double(step) / warmup;
    return cfg.lr_floor + f * (cfg.opt.lr - cfg.lr_floor);
  }
  const double f = double(step - warmup) /
                   std::max(1.0, double(total_steps) - warmup);
  return cfg.lr_floor +
         0.5 * (cfg.opt.lr - cfg.lr_floor) * (1.0 + std::cos(f * M_PI));
}

// Momentum SGD and AdamW over a fixed parameter list. The normalization
// sigma targets are not parameters and never move; gamma/beta are ordinary
// entries in the list when the affine is enabled.
template <typename S>
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, std::vector<Tensor<S>> params)
      : cfg_(cfg), params_(std::move(params)) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(size_t(params_[i].size()), S(0));
      if (cfg_.kind == OptimizerKind::kAdamW) {
        v_[i].assign(size_t(params_[i].size()), S(0));
      }
    }
  }

  void step(double lr) {
    ++t_;
    for (size_t i = 0; i < params_.size(); ++i) {
      Tensor<S>& p = params_[i];
      if (!p.has_grad()) continue;
      const std::vector<S>& g = p.grad();
      for (S gv : g) {
        if (!std::isfinite(double(gv))) {
          throw NumericError("optimizer: non-finite gradient, aborting");
        }
      }
      if (cfg_.kind == OptimizerKind::kSgdMomentum) {
        sgd_step(p, g, m_[i], lr);
      } else {
        adamw_step(p, g, m_[i], v_[i], lr);
      }
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  int64_t steps_taken() const { return t_; }

 private:
  void sgd_step(Tensor<S>& p, const std::vector<S>& g, std::vector<S>& m,
                double lr) {
    const S mom = S(cfg_.momentum), wd = S(cfg_.weight_decay);
    for (int64_t i = 0; i < p.size(); ++i) {
      const S grad = g[size_t(i)] + wd * p.val()[size_t(i)];
      m[size_t(i)] = mom * m[size_t(i)] + grad;
      p.val()[size_t(i)] -= S(lr) * m[size_t(i)];
    }
  }

  void adamw_step(Tensor<S>& p, const std::vector<S>& g, std::vector<S>& m,
                  std::vector<S>& v, double lr) {
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, double(t_));
    const double bc2 = 1.0 - std::pow(b2, double(t_));
    for (int64_t i = 0; i < p.size(); ++i) {
      const double grad = double(g[size_t(i)]);
      const double mi = b1 * double(m[size_t(i)]) + (1.0 - b1) * grad;
      const double vi = b2 * double(v[size_t(i)]) + (1.0 - b2) * grad * grad;
      m[size_t(i)] = S(mi);
      v[size_t(i)] = S(vi);
      const double update = (mi / bc1) / (std::sqrt(vi / bc2) + cfg_.eps);
      p.val()[size_t(i)] -=
          S(lr * update + lr * cfg_.weight_decay * double(p.val()[size_t(i)]));
    }
  }

  OptimizerConfig cfg_;
  std::vector<Tensor<S>> params_;
  std::vector<std::vector<S>> m_, v_;
  int64_t t_ = 0;
};

template <typename S>
void clip_global_norm(std::vector<Tensor<S>>& params, double max_norm) {
  double sq = 0.0;
  for (auto& p : params) {
    if (!p.has_grad()) continue;
    for (S g : p.grad()) sq += double(g) * double(g);
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const S scale = S(max_norm / norm);
  for (auto& p : params) {
    if (!p.has_grad()) continue;
    for (S& g : p.grad()) g *= scale;
  }
}

// ---------------------------------------------------------------------------
// Step-by-step inference
// ---------------------------------------------------------------------------

// Advances every layer one time-step per tick, forwarding spikes immediately,
// so an output spike can appear after tick t without waiting for the full
// input sequence. Mathematically this matches the layer-by-layer pass; the
// payoff is that evaluation can stop per sample at its first output spike.
template <typename S>
class NetworkStepper {
 public:
  explicit NetworkStepper(Network<S>& net, int64_t batch) : net_(net) {
    if (!net.fused()) net.refresh_effective();
    for (size_t i = 0; i < net.layer_count(); ++i) {
      const LayerDesc& d = net.layer(i).desc;
      Shape state_shape{batch};
      state_shape.insert(state_shape.end(), d.out_shape.begin(),
                         d.out_shape.end());
      states_.emplace_back(d.synaptic()
                               ? AmosState<S>(state_shape)
                               : AmosState<S>(Shape{1}));  // placeholder
    }
  }

  // x_t: [B, input...] -> output spikes [B, C]
  Tensor<S> tick(const Tensor<S>& x_t) {
    Tensor<S> x = x_t;
    for (size_t i = 0; i < net_.layer_count(); ++i) {
      Layer<S>& l = net_.layer(i);
      switch (l.desc.kind) {
        case LayerKind::kFlatten: {
          Shape flat{x.dim(0), numel(l.desc.in_shape)};
          x = reshape(x, flat);
          break;
        }
        case LayerKind::kAvgPool:
          x = avg_pool2d(x, l.desc.pool_size);
          break;
        case LayerKind::kMaxPool:
          x = max_pool2d(x, l.desc.pool_size);
          break;
        case LayerKind::kFC:
        case LayerKind::kConv: {
          const Tensor<S>* bias = l.has_bias_eff ? &l.b_eff : nullptr;
          Tensor<S> current =
              l.desc.kind == LayerKind::kFC
                  ? linear(x, l.w_eff, bias)
                  : conv2d(x, l.w_eff, l.desc.stride, 0, bias);
          x = amos_step(states_[i], current, net_.amos());
          break;
        }
      }
    }
    return x;
  }

  // Full sequence through the stepper; for equivalence checks against the
  // layer-by-layer pass.
  Tensor<S> run_all(const Tensor<S>& input) {
    std::vector<Tensor<S>> out;
    for (int64_t t = 0; t < input.dim(0); ++t) {
      out.push_back(tick(slice_time(input, t)));
    }
    return stack_time(out);
  }

 private:
  Network<S>& net_;
  std::vector<AmosState<S>> states_;
};

struct EvalResult {
  double accuracy = 0.0;
  double avg_steps = 0.0;
  int64_t count = 0;
};

// Earliest-spike evaluation. kFixedT runs the full unrolled network; with
// kEarlyStop a sample is done at its first output spike and its latency is
// (first spike tick + 1). Samples with no output spike in T steps count as
// T steps and score as wrong.
template <typename S>
EvalResult evaluate(Network<S>& net, const Dataset& data, const Encoder& enc,
                    EvalMode mode, int64_t batch_size = 256) {
  EvalResult res;
  res.count = data.count;
  const int64_t t_len = net.time_steps();
  int64_t correct = 0;
  double steps_sum = 0.0;
  if (!net.fused()) net.refresh_effective();
  for (int64_t start = 0; start < data.count; start += batch_size) {
    const int64_t b = std::min(batch_size, data.count - start);
    std::vector<int64_t> idx(static_cast<size_t>(b));
    std::iota(idx.begin(), idx.end(), start);
    SpikeTensor<S> input = encode_batch<S>(data, idx, enc);
    if (mode == EvalMode::kFixedT) {
      SpikeTensor<S> out = net.forward(input, RunMode::kInfer);
      const std::vector<int> pred = predict_earliest(out.values);
      for (int64_t i = 0; i < b; ++i) {
        correct += pred[size_t(i)] == int(data.labels[size_t(start + i)]);
      }
      steps_sum += double(b * t_len);
    } else {
      NetworkStepper<S> stepper(net, b);
      std::vector<int> pred(size_t(b), kUndecided);
      std::vector<int64_t> first(size_t(b), t_len);  // latency in ticks - 1
      int64_t undecided = b;
      for (int64_t t = 0; t < t_len && undecided > 0; ++t) {
        Tensor<S> s_out = stepper.tick(slice_time(input.values, t));
        const int64_t classes = s_out.dim(1);
        for (int64_t i = 0; i < b; ++i) {
          if (pred[size_t(i)] != kUndecided) continue;
          const S* row = s_out.data() + i * classes;
          for (int64_t c = 0; c < classes; ++c) {
            if (row[c] > S(0)) {
              pred[size_t(i)] = int(c);
              first[size_t(i)] = t;
              --undecided;
              break;
            }
          }
        }
      }
      for (int64_t i = 0; i < b; ++i) {
        correct += pred[size_t(i)] == int(data.labels[size_t(start + i)]);
        steps_sum += pred[size_t(i)] == kUndecided ? double(t_len)
                                                   : double(first[size_t(i)] + 1);
      }
    }
  }
  res.accuracy = double(correct) / double(std::max<int64_t>(1, data.count));
  res.avg_steps = steps_sum / double(std::max<int64_t>(1, data.count));
  return res;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

template <typename S>
Tensor<S> training_loss(const Tensor<S>& decoded, const std::vector<int>& labels,
                        const DecodeWeights& dw, LossKind kind) {
  return kind == LossKind::kMse ? mse_loss(decoded, labels, dw)
                                : cross_entropy_loss(decoded, labels);
}

// One pass over the training set: encode, unrolled forward with forcing and
// normalization active, decode, loss, reverse pass, optimizer step.
// Deterministic for a fixed seed: the caller owns the rng.
template <typename S>
Metrics train_epoch(Network<S>& net, const Dataset& data, const Encoder& enc,
                    const DecodeWeights& dw, const TrainConfig& cfg,
                    Optimizer<S>& opt, std::vector<Tensor<S>>& params,
                    int64_t total_steps, std::mt19937& rng, int64_t epoch) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<int64_t> order(size_t(data.count));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  Metrics m;
  m.epoch = epoch;
  int64_t correct = 0;
  double loss_sum = 0.0;
  int64_t batches = 0;
  for (int64_t start = 0; start < data.count; start += cfg.batch_size) {
    const int64_t b = std::min(cfg.batch_size, data.count - start);
    std::vector<int64_t> idx(order.begin() + start, order.begin() + start + b);
    SpikeTensor<S> input = encode_batch<S>(data, idx, enc);
    std::vector<int> labels(static_cast<size_t>(b));
    for (int64_t i = 0; i < b; ++i) {
      labels[size_t(i)] = int(data.labels[size_t(idx[size_t(i)])]);
    }

    m.lr = scheduled_lr(cfg, opt.steps_taken(), total_steps);
    Tape<S> tape;
    Tensor<S> loss;
    Tensor<S> decoded;
    {
      TapeScope<S> scope(tape);
      SpikeTensor<S> out = net.forward(input, RunMode::kTrain);
      decoded = decode(out.values, dw);
      loss = training_loss(decoded, labels, dw, cfg.loss);
      if (!std::isfinite(double(loss.item()))) {
        throw NumericError(msg("training diverged: loss ", double(loss.item()),
                               " at epoch ", epoch, ", batch ", batches,
                               ", lr ", m.lr));
      }
      tape.backward(loss);
    }
    const std::vector<int> pred = argmax_classes(decoded);
    for (int64_t i = 0; i < b; ++i) correct += pred[size_t(i)] == labels[size_t(i)];
    loss_sum += double(loss.item());
    ++batches;

    if (cfg.grad_clip > 0) clip_global_norm(params, cfg.grad_clip);
    opt.step(m.lr);
    opt.zero_grad();
  }
  m.train_acc = double(correct) / double(std::max<int64_t>(1, data.count));
  m.loss = loss_sum / double(std::max<int64_t>(1, batches));
  m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return m;
}

struct TrainResult {
  std::vector<Metrics> history;
  double best_test_acc = 0.0;
};

// Full run: epochs of train_epoch, each followed by an early-stop evaluation
// on the test set when one is given. Appends one metrics record per epoch.
template <typename S>
TrainResult train_loop(Network<S>& net, const Dataset& train_data,
                       const Dataset* test_data, const Encoder& enc,
                       const DecodeWeights& dw, const TrainConfig& cfg,
                       const std::string& metrics_path = "",
                       bool verbose = false) {
  cfg.validate();
  std::vector<Tensor<S>> params = net.parameters();
  Optimizer<S> opt(cfg.opt, params);
  std::mt19937 rng(static_cast<uint32_t>(cfg.seed * 0x9e3779b9ull + 1));
  const int64_t steps_per_epoch =
      (train_data.count + cfg.batch_size - 1) / cfg.batch_size;
  const int64_t total_steps = steps_per_epoch * cfg.epochs;

  TrainResult result;
  for (int64_t e = 0; e < cfg.epochs; ++e) {
    Metrics m = train_epoch(net, train_data, enc, dw, cfg, opt, params,
                            total_steps, rng, e);
    if (test_data != nullptr) {
      EvalResult ev = evaluate(net, *test_data, enc, EvalMode::kEarlyStop);
      m.test_acc = ev.accuracy;
      m.avg_infer_steps = ev.avg_steps;
      result.best_test_acc = std::max(result.best_test_acc, ev.accuracy);
    }
    if (!metrics_path.empty()) append_metrics(metrics_path, m);
    if (verbose) {
      std::fprintf(stderr,
                   "epoch %3lld  loss %.5f  train %.4f  test %.4f  "
                   "steps %.2f  lr %.2g  (%lld ms)\n",
                   static_cast<long long>(m.epoch), m.loss, m.train_acc,
                   m.test_acc, m.avg_infer_steps, m.lr,
                   static_cast<long long>(m.wall_ms));
    }
    result.history.push_back(m);
  }
  return result;
}

}  // namespace ettfs

#endif  // ETTFS_TRAIN_HPP_
