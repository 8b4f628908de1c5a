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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line and
// the process exits with the number of failures.
//
//   acceptance --group synthetic   randomized/analytic criteria (5..10)
//   acceptance --group datasets    full training criteria (1..4, 11);
//                                  these need MNIST/Fashion-MNIST IDX files
//                                  under $ETTFS_DATA_DIR (default ./data),
//                                  see tools/fetch_data.sh
//   acceptance --criterion N       run a single criterion

#include <cstdlib>
#include <cstring>
#include <functional>
#include <sstream>

#include "ettfs/ettfs.hpp"
#include "testutil.hpp"

using namespace ettfs;
using namespace ettfs::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string data_dir() {
  const char* env = std::getenv("ETTFS_DATA_DIR");
  return env != nullptr && *env != '\0' ? env : "data";
}

// ---------------------------------------------------------------------------
// Criterion 1+4a: MNIST FC400-FC10, T=8, ETTFS + affine norm + exp decoding,
// AdamW 1e-3, batch 128: >= 97.5% test accuracy within 30 epochs, and the
// trained model's early-stop latency <= 2.0 average steps.
// ---------------------------------------------------------------------------

struct TrainedModel {
  Network<float> net;
  double best_acc = 0.0;
  double avg_steps = 0.0;
};

TrainedModel train_dataset_model(const std::string& dataset,
                                 const std::string& arch, int64_t epochs,
                                 InitKind init, NormMode norm,
                                 const DecodeWeights& dw, uint64_t seed,
                                 double stop_at = 2.0) {
  Dataset train = load_named_dataset(dataset, data_dir(), true);
  Dataset test = load_named_dataset(dataset, data_dir(), false);
  NetworkSpec spec = parse_arch(arch, train.item_shape, dw.t);
  TrainedModel out{Network<float>(spec, AmosConfig{}, norm)};
  init_weights(out.net, InitScheme{init}, seed);
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = 128;
  cfg.opt.kind = OptimizerKind::kAdamW;
  cfg.opt.lr = 1e-3;
  cfg.seed = seed;
  cfg.loss = LossKind::kMse;
  Encoder enc{EncoderKind::kLatency, dw.t};

  std::vector<Tensor<float>> params = out.net.parameters();
  Optimizer<float> opt(cfg.opt, params);
  std::mt19937 rng(static_cast<uint32_t>(seed * 0x9e3779b9ull + 1));
  const int64_t steps_per_epoch =
      (train.count + cfg.batch_size - 1) / cfg.batch_size;
  for (int64_t e = 0; e < epochs; ++e) {
    Metrics m = train_epoch(out.net, train, enc, dw, cfg, opt, params,
                            steps_per_epoch * epochs, rng, e);
    EvalResult ev = evaluate(out.net, test, enc, EvalMode::kEarlyStop);
    std::fprintf(stderr, "  [%s %s] epoch %lld loss %.4f train %.4f test %.4f steps %.2f\n",
                 dataset.c_str(), arch.c_str(), static_cast<long long>(e),
                 m.loss, m.train_acc, ev.accuracy, ev.avg_steps);
    if (ev.accuracy > out.best_acc) {
      out.best_acc = ev.accuracy;
      out.avg_steps = ev.avg_steps;
    }
    if (out.best_acc >= stop_at) break;  // stop_at > 1 disables early exit
  }
  return out;
}

TrainedModel* mnist_model() {
  static TrainedModel* model = nullptr;
  if (model == nullptr) {
    DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 2.0, 8);
    model = new TrainedModel(train_dataset_model(
        "mnist", "FC400-FC10", 30, InitKind::kEttfs, NormMode::kAffine, dw, 1,
        0.9825));
  }
  return model;
}

TrainedModel* fashion_model() {
  static TrainedModel* model = nullptr;
  if (model == nullptr) {
    DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 3.0, 8);
    model = new TrainedModel(train_dataset_model(
        "fashion", "FC400-FC400-FC10", 50, InitKind::kEttfs, NormMode::kAffine,
        dw, 1, 0.895));
  }
  return model;
}

Outcome criterion_1() {
  TrainedModel* m = mnist_model();
  return {m->best_acc >= 0.975,
          msg("MNIST FC400-FC10 best test accuracy ", m->best_acc * 100,
              "% (needs >= 97.5%)")};
}

Outcome criterion_2() {
  TrainedModel* m = fashion_model();
  return {m->best_acc >= 0.88,
          msg("Fashion-MNIST FC400-FC400-FC10 best test accuracy ",
              m->best_acc * 100, "% (needs >= 88.0%)")};
}

// ---------------------------------------------------------------------------
// Criterion 3: component ablation ordering on Fashion-MNIST, 3 seeds:
// ETTFS+norm+affine > ETTFS only > Kaiming baseline, gaps >= 0.3pp.
// ---------------------------------------------------------------------------

Outcome criterion_3() {
  DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 3.0, 8);
  const int64_t epochs = 25;
  double acc_full = 0, acc_init = 0, acc_base = 0;
  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    acc_full += train_dataset_model("fashion", "FC400-FC400-FC10", epochs,
                                    InitKind::kEttfs, NormMode::kAffine, dw,
                                    seed)
                    .best_acc;
    acc_init += train_dataset_model("fashion", "FC400-FC400-FC10", epochs,
                                    InitKind::kEttfs, NormMode::kOff, dw, seed)
                    .best_acc;
    acc_base += train_dataset_model("fashion", "FC400-FC400-FC10", epochs,
                                    InitKind::kKaiming, NormMode::kOff, dw,
                                    seed)
                    .best_acc;
  }
  acc_full /= 3;
  acc_init /= 3;
  acc_base /= 3;
  const bool pass =
      acc_full >= acc_init + 0.003 && acc_init >= acc_base + 0.003;
  return {pass, msg("ablation means: full ", acc_full * 100, "% > init-only ",
                    acc_init * 100, "% > baseline ", acc_base * 100,
                    "% (each gap >= 0.3pp)")};
}

Outcome criterion_4() {
  TrainedModel* mn = mnist_model();
  TrainedModel* fa = fashion_model();
  const bool pass = mn->avg_steps <= 2.0 && fa->avg_steps <= 3.0;
  return {pass, msg("early-stop latency: MNIST ", mn->avg_steps,
                    " steps (<= 2.0), Fashion-MNIST ", fa->avg_steps,
                    " steps (<= 3.0)")};
}

// ---------------------------------------------------------------------------
// Criterion 5: forward statistics of a single FC layer, N = M = 1000, T = 8,
// 64 random one-spike batches.
// ---------------------------------------------------------------------------

Outcome criterion_5() {
  auto stats = [&](InitKind kind) {
    NetworkSpec spec = parse_arch("FC1000", {1000}, 8);
    Network<float> net(spec, AmosConfig{}, NormMode::kOff);
    init_weights(net, InitScheme{kind}, 2024);
    std::mt19937 rng(99);
    double sum = 0, sumsq = 0;
    int64_t n = 0;
    auto observe = [&](size_t, const Tensor<float>& x) {
      for (float v : x.val()) {
        sum += v;
        sumsq += double(v) * double(v);
      }
      n += x.size();
    };
    for (int b = 0; b < 64; ++b) {
      SpikeTensor<float> in = random_one_spike_input({1000}, 8, 8, rng);
      net.forward(in, RunMode::kTrain, observe);
    }
    const double mean = sum / double(n);
    return std::pair<double, double>(mean, sumsq / double(n) - mean * mean);
  };
  auto [me, ve] = stats(InitKind::kEttfs);
  auto [mk, vk] = stats(InitKind::kKaiming);
  const bool pass = std::abs(me) <= 0.05 && ve >= 0.9 && ve <= 1.1 &&
                    vk >= 0.03 && vk <= 0.055;
  return {pass, msg("ETTFS-init E(X)=", me, " D(X)=", ve,
                    " (needs |E|<=0.05, D in [0.9,1.1]); Kaiming D(X)=", vk,
                    " (needs [0.03,0.055], target 1/24)")};
}

// ---------------------------------------------------------------------------
// Criterion 6: rank preservation, 1e5 tie-free one-spike outputs.
// ---------------------------------------------------------------------------

Outcome criterion_6() {
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> gamma_exp(1.05, 4.0);
  std::uniform_real_distribution<double> gamma_lin(0.2, 4.0);
  int64_t checked = 0, agreed = 0, trials = 0;
  while (checked < 100000 && trials < 400000) {
    ++trials;
    const int64_t t_len = 2 + int64_t(rng() % 9);
    const int64_t classes = 2 + int64_t(rng() % 9);
    std::vector<int64_t> times(static_cast<size_t>(classes));
    for (auto& t : times) t = int64_t(rng() % uint64_t(t_len));
    std::vector<int64_t> sorted(times);
    std::sort(sorted.begin(), sorted.end());
    if (sorted[0] == sorted[1]) continue;  // earliest tie: excluded
    const DecodeWeights dw =
        rng() % 2
            ? DecodeWeights::make(DecayMode::kExponential, gamma_exp(rng), t_len)
            : DecodeWeights::make(DecayMode::kLinear, gamma_lin(rng), t_len);
    Tensor<float> o({t_len, 1, classes});
    for (int64_t c = 0; c < classes; ++c) {
      o.val()[size_t(times[size_t(c)] * classes + c)] = 1.f;
    }
    const int by_time = predict_earliest(o)[0];
    const int by_score = argmax_classes(decode(o, dw))[0];
    ++checked;
    agreed += by_time == by_score;
  }
  return {checked == 100000 && agreed == checked,
          msg("argmax(decode) == earliest-spike argmin in ", agreed, "/",
              checked, " tie-free cases")};
}

// ---------------------------------------------------------------------------
// Criterion 7: one-spike invariants per layer kind, 1e4 random inputs each;
// average pooling preserves the unit time-sum; a constructed max-pool case
// breaks it with time-sum 2.
// ---------------------------------------------------------------------------

Outcome criterion_7() {
  std::mt19937 rng(555);
  std::ostringstream detail;
  bool pass = true;

  // FC layer bank: 40 batches x 256 samples = 10240 inputs
  {
    NetworkSpec spec = parse_arch("FC25", {30}, 6);
    Network<float> net(spec, AmosConfig{}, NormMode::kOff);
    init_weights(net, InitScheme{InitKind::kEttfs}, 1);
    int64_t bad = 0, samples = 0;
    for (int b = 0; b < 40; ++b) {
      SpikeTensor<float> in = random_one_spike_input({30}, 6, 256, rng);
      SpikeTensor<float> out = net.forward(in, RunMode::kTrain);
      samples += 256;
      for (float v : out.values.val()) bad += !(v == 0.f || v == 1.f);
      for (float s : time_sums(out.values)) bad += s != 1.f;
    }
    pass = pass && bad == 0;
    detail << "FC: " << samples << " inputs, " << bad << " violations; ";
  }

  // conv layer bank: 40 batches x 250 images
  {
    NetworkSpec spec = parse_arch("C4K3", {2, 7, 7}, 6);
    Network<float> net(spec, AmosConfig{}, NormMode::kOff);
    init_weights(net, InitScheme{InitKind::kEttfs}, 2);
    int64_t bad = 0, samples = 0;
    for (int b = 0; b < 40; ++b) {
      SpikeTensor<float> in = random_one_spike_input({2, 7, 7}, 6, 250, rng);
      SpikeTensor<float> out = net.forward(in, RunMode::kTrain);
      samples += 250;
      for (float s : time_sums(out.values)) bad += s != 1.f;
    }
    pass = pass && bad == 0;
    detail << "conv: " << samples << " inputs, " << bad << " violations; ";
  }

  // average pooling preserves the sum for 1e4 random one-spike windows
  {
    int64_t bad = 0;
    for (int b = 0; b < 40; ++b) {
      SpikeTensor<float> in = random_one_spike_input({1, 10, 10}, 7, 250, rng);
      Tensor<float> pooled = avg_pool2d(in.values, 2);
      for (float s : time_sums(pooled)) {
        bad += std::abs(s - 1.f) > 1e-6f;
      }
    }
    pass = pass && bad == 0;
    detail << "avg-pool: " << bad << " violations; ";
  }

  // max-pool witness: two window members firing at different steps
  {
    Tensor<float> x({4, 1, 1, 2, 2});
    x.val()[size_t(0 * 4 + 0)] = 1.f;
    x.val()[size_t(2 * 4 + 3)] = 1.f;
    const float sum = time_sums(max_pool2d(x, 2))[0];
    pass = pass && sum == 2.f;
    detail << "max-pool witness time-sum " << sum << " (needs 2)";
  }
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 8: fused inference equals the live normalization+affine route.
// ---------------------------------------------------------------------------

Outcome criterion_8() {
  NetworkSpec spec = parse_arch("FC16-FC8", {12}, 6);
  Network<float> net(spec, AmosConfig{}, NormMode::kAffine);
  init_weights(net, InitScheme{InitKind::kEttfs}, 77);
  std::mt19937 rng(78);
  std::uniform_real_distribution<float> gdist(0.75f, 1.25f), bdist(-0.2f, 0.2f);
  for (size_t i = 0; i < net.layer_count(); ++i) {
    if (!net.layer(i).desc.synaptic()) continue;
    for (auto& g : net.layer(i).gamma.val()) g = gdist(rng);
    for (auto& b : net.layer(i).beta.val()) b = bdist(rng);
  }
  DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 2.0, 6);

  // the unfused route: standardize + synapse + affine as separate stages
  auto live_forward = [&](const Tensor<float>& x) {
    Tensor<float> cur = x;
    for (size_t i = 0; i < net.layer_count(); ++i) {
      Layer<float>& l = net.layer(i);
      if (!l.desc.synaptic()) continue;
      Tensor<float> wn = standardize_to(l.w, l.sigma_target,
                                        Network<float>::kNormEps);
      cur = affine_features(linear(cur, wn), l.gamma, l.beta, 2);
      cur = amos_run_sequence(cur, net.amos(), RunMode::kInfer);
    }
    return cur;
  };

  Network<float> fused = net;  // shares parameters; fusion bakes its own copies
  fuse_for_inference(fused);

  double max_abs = 0.0;
  int64_t class_mismatches = 0;
  for (int rep = 0; rep < 10; ++rep) {
    SpikeTensor<float> in = random_one_spike_input({12}, 6, 100, rng);
    Tensor<float> o_live = live_forward(in.values);
    SpikeTensor<float> o_fused = fused.forward(in, RunMode::kInfer);
    Tensor<float> y_live = decode(o_live, dw);
    Tensor<float> y_fused = decode(o_fused.values, dw);
    for (int64_t i = 0; i < y_live.size(); ++i) {
      max_abs = std::max(max_abs, std::abs(double(y_live.val()[size_t(i)]) -
                                           double(y_fused.val()[size_t(i)])));
    }
    const std::vector<int> pa = predict_earliest(o_live);
    const std::vector<int> pb = predict_earliest(o_fused.values);
    for (size_t i = 0; i < pa.size(); ++i) class_mismatches += pa[i] != pb[i];
  }
  const bool pass = max_abs < 1e-5 && class_mismatches == 0;
  return {pass, msg("1000 inputs: max |Y_fused - Y_live| = ", max_abs,
                    " (needs < 1e-5), ", class_mismatches,
                    " predicted-class mismatches")};
}

// ---------------------------------------------------------------------------
// Criterion 9: BPTT gradient oracle. Smooth-forward 2-layer T=4 network;
// every parameter matches central finite differences, rel err < 1e-4.
// ---------------------------------------------------------------------------

Outcome criterion_9() {
  NetworkSpec spec = parse_arch("FC6-FC3", {5}, 4);
  AmosConfig amos;
  amos.smooth_forward = true;
  Network<double> net(spec, amos, NormMode::kAffine);
  init_weights(net, InitScheme{InitKind::kEttfs}, 4242);
  std::mt19937 rng(4243);
  // move gamma/beta off their init so their gradients are generic
  for (size_t i = 0; i < net.layer_count(); ++i) {
    std::uniform_real_distribution<double> d(-0.3, 0.3);
    for (auto& g : net.layer(i).gamma.val()) g = 1.0 + d(rng);
    for (auto& b : net.layer(i).beta.val()) b = d(rng);
  }

  Tensor<double> x({4, 3, 5});
  for (int64_t u = 0; u < 3 * 5; ++u) {
    x.val()[size_t((rng() % 4) * 15 + u)] = 1.0;
  }
  const std::vector<int> labels{0, 2, 1};
  DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 2.0, 4);

  auto forward = [&]() -> Tensor<double> {
    SpikeTensor<double> out = net.forward({x, true, true}, RunMode::kTrain);
    return mse_loss(decode(out.values, dw), labels, dw);
  };

  std::vector<Tensor<double>> params = net.parameters();
  for (auto& p : params) {
    p.ensure_grad();
    p.zero_grad();
  }
  Tape<double> tape;
  {
    TapeScope<double> scope(tape);
    tape.backward(forward());
  }

  double worst = 0.0;
  int64_t checked = 0;
  for (auto& p : params) {
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    const std::vector<double> fd =
        fd_gradient([&] { return forward().item(); }, p, 1e-5);
    for (size_t i = 0; i < fd.size(); ++i) {
      const double scale = std::max({std::abs(analytic[i]), std::abs(fd[i]), 1e-6});
      worst = std::max(worst, std::abs(analytic[i] - fd[i]) / scale);
      ++checked;
    }
  }
  return {worst < 1e-4, msg(checked, " parameters, worst rel err ", worst,
                            " (needs < 1e-4)")};
}

// ---------------------------------------------------------------------------
// Criterion 10: signal and gradient trends in a 5-layer network.
//  - ETTFS-init, train-mode (one-spike) propagation: every layer's D(X) in
//    [0.8, 1.2].
//  - Kaiming, free-running inference propagation at vth=0.5: D(X) strictly
//    decreasing across layers (the silence cascade).
//  - train-mode first-layer gradient magnitude: ETTFS >= 1e3 x Kaiming.
// ---------------------------------------------------------------------------

Outcome criterion_10() {
  const std::string arch = "FC500-FC500-FC500-FC500-FC500";
  DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 2.0, 8);
  std::ostringstream detail;
  bool pass = true;

  AnalyzeOptions opts;
  opts.batches = 6;
  opts.batch_size = 32;
  opts.seed = 7;

  // ETTFS in its design regime
  {
    NetworkSpec spec = parse_arch(arch, {784}, 8);
    Network<float> net(spec, AmosConfig{}, NormMode::kOff);
    init_weights(net, InitScheme{InitKind::kEttfs}, 1);
    opts.mode = RunMode::kTrain;
    auto stats = analyze_network(net, dw, opts);
    detail << "ETTFS train-mode D(X): ";
    for (const auto& s : stats) {
      detail << s.x_var << " ";
      pass = pass && s.x_var >= 0.8 && s.x_var <= 1.2;
    }
  }

  // Kaiming silence cascade
  {
    NetworkSpec spec = parse_arch(arch, {784}, 8);
    AmosConfig amos;
    amos.v_threshold = 0.5f;
    Network<float> net(spec, amos, NormMode::kOff);
    init_weights(net, InitScheme{InitKind::kKaiming}, 1);
    opts.mode = RunMode::kInfer;
    auto stats = analyze_network(net, dw, opts);
    detail << "| Kaiming infer-mode D(X): ";
    for (size_t i = 0; i < stats.size(); ++i) {
      detail << stats[i].x_var << " ";
      if (i > 0) pass = pass && stats[i].x_var < stats[i - 1].x_var;
    }
  }

  // gradient scales, train mode, default threshold
  {
    NetworkSpec spec = parse_arch(arch, {784}, 8);
    Network<float> e_net(spec, AmosConfig{}, NormMode::kOff);
    Network<float> k_net(spec, AmosConfig{}, NormMode::kOff);
    init_weights(e_net, InitScheme{InitKind::kEttfs}, 1);
    init_weights(k_net, InitScheme{InitKind::kKaiming}, 1);
    opts.mode = RunMode::kTrain;
    const double g_e = analyze_network(e_net, dw, opts)[0].g_mean_abs;
    const double g_k = analyze_network(k_net, dw, opts)[0].g_mean_abs;
    const double ratio = g_k > 0 ? g_e / g_k : 0.0;
    detail << "| first-layer |dL/dW|: ETTFS " << g_e << " vs Kaiming " << g_k
           << " (ratio " << ratio << ", needs >= 1e3)";
    pass = pass && ratio >= 1e3;
  }
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// Criterion 11 (depth-11 qualitative check): an 11-layer FC stack on
// Fashion-MNIST clears 80% with ETTFS-init while Kaiming stays below it.
// ---------------------------------------------------------------------------

Outcome criterion_11() {
  DecodeWeights dw = DecodeWeights::make(DecayMode::kExponential, 3.0, 8);
  const std::string arch = "{FC400}*10-FC10";  // 11 synaptic layers
  TrainedModel deep_e =
      train_dataset_model("fashion", arch, 15, InitKind::kEttfs,
                          NormMode::kAffine, dw, 3, 0.84);
  TrainedModel deep_k =
      train_dataset_model("fashion", arch, 15, InitKind::kKaiming,
                          NormMode::kOff, dw, 3, 2.0);
  const bool pass = deep_e.best_acc > 0.80 && deep_k.best_acc < deep_e.best_acc &&
                    deep_k.best_acc <= 0.80;
  return {pass, msg("11-layer stack: ETTFS ", deep_e.best_acc * 100,
                    "% (needs > 80%), Kaiming ", deep_k.best_acc * 100,
                    "% (needs <= 80%)")};
}

struct Criterion {
  int number;
  const char* group;
  const char* title;
  std::function<Outcome()> run;
};

const Criterion kCriteria[] = {
    {1, "datasets", "MNIST FC400-FC10 accuracy >= 97.5% within 30 epochs",
     criterion_1},
    {2, "datasets", "Fashion-MNIST FC400-FC400-FC10 accuracy >= 88.0% within 50 epochs",
     criterion_2},
    {3, "datasets", "ablation ordering full > init-only > baseline (3 seeds)",
     criterion_3},
    {4, "datasets", "early-stop latency MNIST <= 2.0, Fashion-MNIST <= 3.0",
     criterion_4},
    {5, "synthetic", "single-layer forward statistics (unit variance vs 1/24)",
     criterion_5},
    {6, "synthetic", "rank preservation of temporal decoding (1e5 cases)",
     criterion_6},
    {7, "synthetic", "one-spike invariants per layer kind + pooling",
     criterion_7},
    {8, "synthetic", "fusion equivalence at inference", criterion_8},
    {9, "synthetic", "BPTT gradients vs finite differences (smooth forward)",
     criterion_9},
    {10, "synthetic", "signal variance and gradient-scale trends (5 layers)",
     criterion_10},
    {11, "datasets", "depth-11 stack: ETTFS > 80% on Fashion-MNIST, Kaiming below",
     criterion_11},
};

}  // namespace

int main(int argc, char** argv) {
  std::string group = "all";
  int only = -1;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--group") == 0 && i + 1 < argc) {
      group = argv[++i];
    } else if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr,
                   "usage: acceptance [--group synthetic|datasets|all] "
                   "[--criterion N]\n");
      return 2;
    }
  }
  int failures = 0, ran = 0;
  for (const Criterion& c : kCriteria) {
    if (only >= 0 && c.number != only) continue;
    if (only < 0 && group != "all" && group != c.group) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, msg("exception: ", e.what())};
    }
    std::printf("[%s] criterion %2d: %s — %s\n", o.pass ? "PASS" : "FAIL",
                c.number, c.title, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criteria matched the filter\n");
    return 2;
  }
  return failures;
}
