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

#include "ettfs/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace ettfs {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written as little-endian host floats");

constexpr char kMagic[8] = {'E', 'T', 'T', 'F', 'S', 'C', 'K', 'P'};
constexpr uint32_t kVersion = 1;

using nlohmann::json;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_blob(std::ostream& out, const std::vector<float>& v) {
  const uint64_t bytes = v.size() * sizeof(float);
  out.write(reinterpret_cast<const char*>(&bytes), sizeof(bytes));
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(bytes));
}

uint32_t read_u32(std::istream& in, const std::string& path) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw FormatError(msg(path, ": truncated header"));
  return v;
}

std::vector<float> read_blob(std::istream& in, size_t expect_elems,
                             const std::string& path, const std::string& what) {
  uint64_t bytes = 0;
  in.read(reinterpret_cast<char*>(&bytes), sizeof(bytes));
  if (!in) throw FormatError(msg(path, ": truncated before ", what, " blob"));
  if (bytes != expect_elems * sizeof(float)) {
    throw FormatError(msg(path, ": ", what, " blob holds ", bytes,
                          " bytes, expected ", expect_elems * sizeof(float)));
  }
  std::vector<float> v(expect_elems);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(bytes));
  if (!in) throw FormatError(msg(path, ": truncated inside ", what, " blob"));
  return v;
}

const char* charge_name(ChargeKind k) {
  return k == ChargeKind::kIF ? "if" : "lif";
}
const char* surrogate_name(SurrogateKind k) {
  return k == SurrogateKind::kArctan ? "arctan" : "rectangular";
}
const char* norm_name(NormMode m) {
  switch (m) {
    case NormMode::kOff: return "off";
    case NormMode::kPlain: return "on";
    case NormMode::kAffine: return "affine";
  }
  return "off";
}

NormMode norm_from(const std::string& s) {
  if (s == "off") return NormMode::kOff;
  if (s == "on") return NormMode::kPlain;
  if (s == "affine") return NormMode::kAffine;
  throw FormatError(msg("unknown norm mode \"", s, "\" in checkpoint"));
}

}  // namespace

void save_checkpoint(const Network<float>& net, const RunSettings& settings,
                     const std::string& path) {
  json meta;
  meta["arch"] = render_arch(net.spec());
  meta["input_shape"] = net.spec().input_shape;
  meta["t"] = net.spec().t;
  const AmosConfig& a = net.amos();
  meta["neuron"] = {{"v_threshold", a.v_threshold},
                    {"charge", charge_name(a.charge)},
                    {"tau_m", a.tau_m},
                    {"v_rest", a.v_rest},
                    {"surrogate", surrogate_name(a.surrogate)},
                    {"surrogate_width", a.surrogate_width}};
  meta["norm"] = norm_name(net.norm());
  meta["fused"] = net.fused();
  meta["init"] = settings.init == InitKind::kEttfs ? "ettfs" : "kaiming";
  meta["decode"] = {{"mode", settings.decode_mode == DecayMode::kExponential
                                 ? "exp"
                                 : "lin"},
                    {"gamma", settings.decode_gamma}};
  meta["encoder"] =
      settings.encoder == EncoderKind::kLatency ? "latency" : "direct";
  std::vector<double> sigmas;
  for (size_t i = 0; i < net.layer_count(); ++i) {
    if (net.layer(i).desc.synaptic()) sigmas.push_back(net.layer(i).sigma_target);
  }
  meta["sigma_target"] = sigmas;

  const std::string meta_text = meta.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(msg("cannot write ", path));
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(meta_text.size()));
  out.write(meta_text.data(), std::streamsize(meta_text.size()));
  for (size_t i = 0; i < net.layer_count(); ++i) {
    const Layer<float>& l = net.layer(i);
    if (!l.desc.synaptic()) continue;
    if (net.fused()) {
      write_blob(out, l.w_eff.val());
      write_blob(out, l.has_bias_eff
                          ? l.b_eff.val()
                          : std::vector<float>(size_t(numel(l.gamma.shape())), 0.f));
    } else {
      write_blob(out, l.w.val());
      write_blob(out, l.gamma.val());
      write_blob(out, l.beta.val());
    }
  }
  if (!out) throw FormatError(msg("write failed for ", path));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(msg("cannot open ", path));
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(msg(path, ": not a checkpoint (bad magic)"));
  }
  const uint32_t version = read_u32(in, path);
  if (version != kVersion) {
    throw FormatError(msg(path, ": format version ", version,
                          " is incompatible with supported version ", kVersion));
  }
  const uint32_t meta_len = read_u32(in, path);
  std::string meta_text(meta_len, '\0');
  in.read(meta_text.data(), meta_len);
  if (!in) throw FormatError(msg(path, ": truncated metadata"));

  json meta;
  try {
    meta = json::parse(meta_text);
  } catch (const std::exception& e) {
    throw FormatError(msg(path, ": bad metadata: ", e.what()));
  }

  Shape input_shape;
  for (const auto& v : meta.at("input_shape")) input_shape.push_back(v);
  NetworkSpec spec = parse_arch(meta.at("arch"), input_shape, meta.at("t"));

  AmosConfig amos;
  const json& n = meta.at("neuron");
  amos.v_threshold = n.at("v_threshold");
  amos.charge = n.at("charge") == "lif" ? ChargeKind::kLIF : ChargeKind::kIF;
  amos.tau_m = n.at("tau_m");
  amos.v_rest = n.at("v_rest");
  amos.surrogate = n.at("surrogate") == "rectangular" ? SurrogateKind::kRectangular
                                                      : SurrogateKind::kArctan;
  amos.surrogate_width = n.at("surrogate_width");

  LoadedCheckpoint result{
      Network<float>(spec, amos, norm_from(meta.at("norm"))), RunSettings{}};
  result.settings.init =
      meta.at("init") == "kaiming" ? InitKind::kKaiming : InitKind::kEttfs;
  result.settings.decode_mode = meta.at("decode").at("mode") == "lin"
                                    ? DecayMode::kLinear
                                    : DecayMode::kExponential;
  result.settings.decode_gamma = meta.at("decode").at("gamma");
  result.settings.encoder =
      meta.at("encoder") == "direct" ? EncoderKind::kDirect : EncoderKind::kLatency;
  result.net.set_init_kind(result.settings.init);

  const bool fused = meta.at("fused");
  const std::vector<double> sigmas = meta.at("sigma_target");
  size_t synaptic = 0;
  for (size_t i = 0; i < result.net.layer_count(); ++i) {
    Layer<float>& l = result.net.layer(i);
    if (!l.desc.synaptic()) continue;
    if (synaptic >= sigmas.size()) {
      throw FormatError(msg(path, ": sigma_target list shorter than layers"));
    }
    l.sigma_target = float(sigmas[synaptic++]);
    const std::string tag = "layer " + std::to_string(i);
    if (fused) {
      l.w_eff = Tensor<float>(l.w.shape(),
                              read_blob(in, size_t(l.w.size()), path, tag + " W"));
      l.b_eff = Tensor<float>(l.gamma.shape(),
                              read_blob(in, size_t(l.gamma.size()), path, tag + " B"));
      l.has_bias_eff = true;
    } else {
      l.w = Tensor<float>(l.w.shape(),
                          read_blob(in, size_t(l.w.size()), path, tag + " W"));
      l.gamma = Tensor<float>(
          l.gamma.shape(), read_blob(in, size_t(l.gamma.size()), path, tag + " gamma"));
      l.beta = Tensor<float>(
          l.beta.shape(), read_blob(in, size_t(l.beta.size()), path, tag + " beta"));
      l.w.set_requires_grad(true);
      if (result.net.norm() == NormMode::kAffine) {
        l.gamma.set_requires_grad(true);
        l.beta.set_requires_grad(true);
      }
    }
  }
  if (fused) result.net.mark_fused();
  return result;
}

}  // namespace ettfs
