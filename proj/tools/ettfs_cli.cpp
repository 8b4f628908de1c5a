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

// Command-line driver: train / eval / analyze / sweep-gamma.
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <map>

#include "ettfs/ettfs.hpp"

using namespace ettfs;

namespace {

struct CommonModelArgs {
  std::string arch;
  std::string dataset = "mnist";
  std::string data_dir = "data";
  int64_t t = 8;
  std::string init = "ettfs";
  std::string norm = "affine";
  std::string pool = "avg";
  std::string encoder = "latency";
  uint64_t seed = 1;
};

struct DecodeArgs {
  std::string mode;  // empty: dataset default
  double gamma = 0;  // 0: dataset default
};

// Dataset defaults for the decoding decay; the Fashion-MNIST and CIFAR10
// values are the sweep winners, MNIST uses exponential gamma=2.
void resolve_decode_defaults(const std::string& dataset, DecodeArgs& d) {
  if (d.mode.empty()) {
    d.mode = dataset == "cifar10" ? "lin" : "exp";
  }
  if (d.gamma == 0) {
    if (dataset == "fashion") {
      d.gamma = 3.0;
    } else if (dataset == "cifar10") {
      d.gamma = 3.0;
    } else {
      d.gamma = 2.0;
    }
  }
}

DecodeWeights make_decode(const DecodeArgs& d, int64_t t) {
  return DecodeWeights::make(
      d.mode == "lin" ? DecayMode::kLinear : DecayMode::kExponential, d.gamma,
      t);
}

InitKind init_kind(const std::string& s) {
  return s == "kaiming" ? InitKind::kKaiming : InitKind::kEttfs;
}

NormMode norm_mode(const std::string& s) {
  if (s == "off") return NormMode::kOff;
  if (s == "on") return NormMode::kPlain;
  return NormMode::kAffine;
}

Network<float> build_network(const CommonModelArgs& a, const Shape& item_shape,
                             float vth) {
  NetworkSpec spec = parse_arch(a.arch, item_shape, a.t,
                                a.pool == "max" ? PoolKind::kMax : PoolKind::kAvg);
  AmosConfig amos;
  amos.v_threshold = vth;
  Network<float> net(spec, amos, norm_mode(a.norm));
  InitScheme scheme{init_kind(a.init), a.encoder == "direct"};
  init_weights(net, scheme, a.seed);
  return net;
}

int cmd_train(const CommonModelArgs& a, const DecodeArgs& d_in,
              const std::string& loss, const std::string& optimizer, double lr,
              double momentum, double weight_decay, const std::string& schedule,
              int64_t epochs, int64_t batch_size, double grad_clip,
              const std::string& out_path, const std::string& metrics_path,
              bool quiet) {
  DecodeArgs d = d_in;
  resolve_decode_defaults(a.dataset, d);
  const DecodeWeights dw = make_decode(d, a.t);

  Dataset train = load_named_dataset(a.dataset, a.data_dir, true);
  Dataset test = load_named_dataset(a.dataset, a.data_dir, false);
  Network<float> net = build_network(a, train.item_shape, 1.0f);

  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.batch_size = batch_size;
  cfg.opt.kind = optimizer == "sgd" ? OptimizerKind::kSgdMomentum
                                    : OptimizerKind::kAdamW;
  cfg.opt.lr = lr;
  cfg.opt.momentum = momentum;
  cfg.opt.weight_decay = weight_decay;
  cfg.schedule = schedule == "warmup-cosine" ? LrSchedule::kWarmupCosine
                                             : LrSchedule::kConstant;
  cfg.loss = loss == "ce" ? LossKind::kCrossEntropy : LossKind::kMse;
  cfg.grad_clip = grad_clip;
  cfg.seed = a.seed;

  Encoder enc{a.encoder == "direct" ? EncoderKind::kDirect
                                    : EncoderKind::kLatency,
              a.t};
  TrainResult res = train_loop(net, train, &test, enc, dw, cfg, metrics_path,
                               !quiet);
  if (!out_path.empty()) {
    RunSettings settings;
    settings.init = init_kind(a.init);
    settings.decode_mode =
        d.mode == "lin" ? DecayMode::kLinear : DecayMode::kExponential;
    settings.decode_gamma = d.gamma;
    settings.encoder = enc.kind;
    save_checkpoint(net, settings, out_path);
  }
  const Metrics& last = res.history.back();
  std::printf(
      "trained %s on %s: final test accuracy %.4f (best %.4f), "
      "avg inference steps %.2f\n",
      a.arch.c_str(), a.dataset.c_str(), last.test_acc, res.best_test_acc,
      last.avg_infer_steps);
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& dataset,
             const std::string& data_dir, bool fuse, int64_t batch_size) {
  LoadedCheckpoint loaded = load_checkpoint(ckpt);
  if (fuse && !loaded.net.fused()) fuse_for_inference(loaded.net);
  Dataset test = load_named_dataset(dataset, data_dir, false);
  Encoder enc{loaded.settings.encoder, loaded.net.time_steps()};

  EvalResult early =
      evaluate(loaded.net, test, enc, EvalMode::kEarlyStop, batch_size);
  EvalResult fixed =
      evaluate(loaded.net, test, enc, EvalMode::kFixedT, batch_size);
  std::printf("checkpoint: %s (%s%s)\n", ckpt.c_str(),
              render_arch(loaded.net.spec()).c_str(),
              loaded.net.fused() ? ", fused" : "");
  std::printf("early-stop: accuracy %.4f, avg_infer_steps %.3f of T=%lld\n",
              early.accuracy, early.avg_steps,
              static_cast<long long>(loaded.net.time_steps()));
  std::printf("fixed-T:    accuracy %.4f\n", fixed.accuracy);
  return 0;
}

int cmd_analyze(const CommonModelArgs& a, const std::string& mode, float vth,
                int64_t batches, int64_t batch_size, int64_t bins,
                const std::string& input_desc, const std::string& out_path) {
  Shape item_shape;
  for (size_t pos = 0; pos < input_desc.size();) {
    const size_t comma = input_desc.find(',', pos);
    item_shape.push_back(std::stoll(input_desc.substr(pos, comma - pos)));
    pos = comma == std::string::npos ? input_desc.size() : comma + 1;
  }
  Network<float> net = build_network(a, item_shape, vth);
  DecodeArgs d;
  resolve_decode_defaults(a.dataset, d);
  AnalyzeOptions opts;
  opts.batches = batches;
  opts.batch_size = batch_size;
  opts.hist_bins = bins;
  opts.seed = a.seed;
  opts.mode = mode == "infer" ? RunMode::kInfer : RunMode::kTrain;
  const std::vector<LayerStats> stats =
      analyze_network(net, make_decode(d, a.t), opts);
  std::printf("layer  D(X)        E(X)        mean|dL/dW|\n");
  for (const auto& s : stats) {
    std::printf("%5lld  %-10.5g  %-10.3g  %-10.4g\n",
                static_cast<long long>(s.layer), s.x_var, s.x_mean,
                s.g_mean_abs);
  }
  if (!out_path.empty()) {
    write_analysis(out_path, stats);
    std::printf("histograms written to %s\n", out_path.c_str());
  }
  return 0;
}

int cmd_sweep_gamma(const CommonModelArgs& a, const std::vector<double>& gammas,
                    const std::vector<std::string>& modes,
                    const std::string& loss, double lr, int64_t epochs,
                    int64_t batch_size, const std::string& out_path,
                    bool quiet) {
  // validate every combination up front so a bad gamma fails before any
  // training time is spent
  for (const std::string& mode : modes) {
    for (double g : gammas) {
      DecodeWeights::make(mode == "lin" ? DecayMode::kLinear
                                        : DecayMode::kExponential,
                          g, a.t);
    }
  }
  Dataset train = load_named_dataset(a.dataset, a.data_dir, true);
  Dataset test = load_named_dataset(a.dataset, a.data_dir, false);
  Encoder enc{a.encoder == "direct" ? EncoderKind::kDirect
                                    : EncoderKind::kLatency,
              a.t};

  std::FILE* out = out_path.empty() ? nullptr : std::fopen(out_path.c_str(), "w");
  if (!out_path.empty() && out == nullptr) {
    throw FormatError(msg("cannot write ", out_path));
  }
  std::printf("mode  gamma  best_acc  avg_steps\n");
  if (out) std::fprintf(out, "mode\tgamma\tbest_acc\tavg_steps\n");
  for (const std::string& mode : modes) {
    for (double g : gammas) {
      const DecodeWeights dw = DecodeWeights::make(
          mode == "lin" ? DecayMode::kLinear : DecayMode::kExponential, g, a.t);
      Network<float> net = build_network(a, train.item_shape, 1.0f);
      TrainConfig cfg;
      cfg.epochs = epochs;
      cfg.batch_size = batch_size;
      cfg.opt.lr = lr;
      cfg.loss = loss == "ce" ? LossKind::kCrossEntropy : LossKind::kMse;
      cfg.seed = a.seed;
      TrainResult res =
          train_loop(net, train, &test, enc, dw, cfg, "", !quiet);
      double steps = res.history.back().avg_infer_steps;
      std::printf("%-4s  %-5.3g  %-8.4f  %.3f\n", mode.c_str(), g,
                  res.best_test_acc, steps);
      std::fflush(stdout);
      if (out) {
        std::fprintf(out, "%s\t%g\t%.4f\t%.3f\n", mode.c_str(), g,
                     res.best_test_acc, steps);
      }
    }
  }
  if (out) std::fclose(out);
  return 0;
}

void add_common(CLI::App* cmd, CommonModelArgs& a, bool needs_arch) {
  cmd->add_option("--arch", a.arch, "architecture string, e.g. FC400-FC10")
      ->required(needs_arch);
  cmd->add_option("--dataset", a.dataset)
      ->check(CLI::IsMember({"mnist", "fashion", "cifar10"}));
  cmd->add_option("--data-dir", a.data_dir, "directory holding <dataset>/ files");
  cmd->add_option("--t", a.t, "time-steps")->check(CLI::PositiveNumber);
  cmd->add_option("--init", a.init)->check(CLI::IsMember({"ettfs", "kaiming"}));
  cmd->add_option("--norm", a.norm, "weight normalization mode")
      ->check(CLI::IsMember({"off", "on", "affine"}));
  cmd->add_option("--pool", a.pool)->check(CLI::IsMember({"avg", "max"}));
  cmd->add_option("--encoder", a.encoder)
      ->check(CLI::IsMember({"latency", "direct"}));
  cmd->add_option("--seed", a.seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-to-first-spike network training and evaluation"};
  app.require_subcommand(1);

  // train
  CommonModelArgs train_args;
  DecodeArgs train_decode;
  std::string train_loss = "mse", train_opt = "adamw", train_sched = "constant";
  double train_lr = 1e-3, train_momentum = 0.9, train_wd = 0.0, train_clip = 0.0;
  int64_t train_epochs = 100, train_batch = 128;
  std::string train_out, train_metrics;
  bool train_quiet = false;
  CLI::App* train = app.add_subcommand("train", "train a model");
  add_common(train, train_args, true);
  train->add_option("--decode", train_decode.mode)
      ->check(CLI::IsMember({"exp", "lin"}));
  train->add_option("--gamma", train_decode.gamma, "decoding decay factor");
  train->add_option("--loss", train_loss)->check(CLI::IsMember({"mse", "ce"}));
  train->add_option("--optimizer", train_opt)
      ->check(CLI::IsMember({"adamw", "sgd"}));
  train->add_option("--lr", train_lr);
  train->add_option("--momentum", train_momentum);
  train->add_option("--weight-decay", train_wd);
  train->add_option("--lr-schedule", train_sched)
      ->check(CLI::IsMember({"constant", "warmup-cosine"}));
  train->add_option("--epochs", train_epochs)->check(CLI::PositiveNumber);
  train->add_option("--batch-size", train_batch)->check(CLI::PositiveNumber);
  train->add_option("--grad-clip", train_clip, "global-norm clip, 0 = off");
  train->add_option("--out", train_out, "checkpoint path");
  train->add_option("--metrics", train_metrics, "per-epoch JSONL metrics file");
  train->add_flag("--quiet", train_quiet, "suppress per-epoch stderr lines");

  // eval
  std::string eval_ckpt, eval_dataset = "mnist", eval_data_dir = "data";
  bool eval_fuse = false;
  int64_t eval_batch = 256;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--ckpt", eval_ckpt)->required();
  eval->add_option("--dataset", eval_dataset)
      ->check(CLI::IsMember({"mnist", "fashion", "cifar10"}));
  eval->add_option("--data-dir", eval_data_dir);
  eval->add_flag("--fuse", eval_fuse, "fold normalization/affine into synapses");
  eval->add_option("--batch-size", eval_batch)->check(CLI::PositiveNumber);

  // analyze
  CommonModelArgs an_args;
  std::string an_mode = "train", an_input = "784", an_out;
  float an_vth = 1.0f;
  int64_t an_batches = 8, an_batch = 32, an_bins = 64;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "signal/gradient statistics of a fresh network");
  add_common(analyze, an_args, true);
  analyze->add_option("--mode", an_mode, "propagation regime")
      ->check(CLI::IsMember({"train", "infer"}));
  analyze->add_option("--vth", an_vth, "firing threshold");
  analyze->add_option("--batches", an_batches)->check(CLI::PositiveNumber);
  analyze->add_option("--batch-size", an_batch)->check(CLI::PositiveNumber);
  analyze->add_option("--bins", an_bins)->check(CLI::PositiveNumber);
  analyze->add_option("--input", an_input,
                      "input item shape, e.g. 784 or 1,28,28");
  analyze->add_option("--out", an_out, "JSONL histogram output");

  // sweep-gamma
  CommonModelArgs sw_args;
  std::vector<double> sw_gammas{1.5, 2.0, 2.5, 3.0};
  std::vector<std::string> sw_modes{"exp", "lin"};
  std::string sw_loss = "mse", sw_out;
  double sw_lr = 1e-3;
  int64_t sw_epochs = 10, sw_batch = 128;
  bool sw_quiet = false;
  CLI::App* sweep = app.add_subcommand(
      "sweep-gamma", "train across decoding decay settings");
  add_common(sweep, sw_args, true);
  sweep->add_option("--gammas", sw_gammas)->delimiter(',');
  sweep->add_option("--modes", sw_modes)
      ->delimiter(',')
      ->check(CLI::IsMember({"exp", "lin"}));
  sweep->add_option("--loss", sw_loss)->check(CLI::IsMember({"mse", "ce"}));
  sweep->add_option("--lr", sw_lr);
  sweep->add_option("--epochs", sw_epochs)->check(CLI::PositiveNumber);
  sweep->add_option("--batch-size", sw_batch)->check(CLI::PositiveNumber);
  sweep->add_option("--out", sw_out, "TSV results file");
  sweep->add_flag("--quiet", sw_quiet);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help exits 0, everything else is usage
  }

  try {
    if (*train) {
      return cmd_train(train_args, train_decode, train_loss, train_opt,
                       train_lr, train_momentum, train_wd, train_sched,
                       train_epochs, train_batch, train_clip, train_out,
                       train_metrics, train_quiet);
    }
    if (*eval) {
      return cmd_eval(eval_ckpt, eval_dataset, eval_data_dir, eval_fuse,
                      eval_batch);
    }
    if (*analyze) {
      return cmd_analyze(an_args, an_mode, an_vth, an_batches, an_batch,
                         an_bins, an_input, an_out);
    }
    if (*sweep) {
      return cmd_sweep_gamma(sw_args, sw_gammas, sw_modes, sw_loss, sw_lr,
                             sw_epochs, sw_batch, sw_out, sw_quiet);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
