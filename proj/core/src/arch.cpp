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

#include "ettfs/arch.hpp"

#include <cctype>

#include "ettfs/error.hpp"

namespace ettfs {
namespace {

struct Token {
  std::string text;
  size_t pos;  // position in the original string, for error messages
};

[[noreturn]] void fail(const std::string& s, size_t pos, const std::string& why) {
  throw ConfigError(msg("arch \"", s, "\": ", why, " at position ", pos));
}

int64_t read_int(const std::string& s, size_t& i, size_t item_pos) {
  size_t start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == start) fail(s, item_pos, "expected a number");
  return std::stoll(s.substr(start, i - start));
}

// seq := item ('-' item)* ; item := token | '{' seq '}' '*' int
std::vector<Token> parse_seq(const std::string& s, size_t& i, size_t end) {
  std::vector<Token> out;
  while (i < end) {
    const size_t item_pos = i;
    if (s[i] == '{') {
      size_t depth = 1, j = i + 1;
      while (j < end && depth > 0) {
        if (s[j] == '{') ++depth;
        if (s[j] == '}') --depth;
        ++j;
      }
      if (depth != 0) fail(s, item_pos, "unbalanced '{'");
      size_t inner = i + 1;
      std::vector<Token> group = parse_seq(s, inner, j - 1);
      i = j;
      if (i >= end || s[i] != '*') fail(s, i, "expected '*' after '}'");
      ++i;
      const int64_t reps = read_int(s, i, item_pos);
      if (reps < 1) fail(s, item_pos, "repeat count must be >= 1");
      for (int64_t r = 0; r < reps; ++r) {
        out.insert(out.end(), group.begin(), group.end());
      }
    } else if (s[i] == '-') {
      fail(s, i, "empty token");
    } else {
      size_t j = i;
      while (j < end && s[j] != '-' && s[j] != '{' && s[j] != '}') ++j;
      out.push_back(Token{s.substr(i, j - i), item_pos});
      i = j;
    }
    if (i < end) {
      if (s[i] != '-') fail(s, i, "expected '-' between tokens");
      ++i;
      if (i >= end) fail(s, i, "trailing '-'");
    }
  }
  return out;
}

}  // namespace

NetworkSpec parse_arch(const std::string& s, const Shape& input_shape,
                       int64_t t, PoolKind pool) {
  if (t < 1) throw ConfigError(msg("arch \"", s, "\": time-steps ", t, " < 1"));
  if (input_shape.size() != 1 && input_shape.size() != 3) {
    throw ConfigError(msg("arch \"", s, "\": input shape ",
                          shape_str(input_shape), " must be [N] or [C,H,W]"));
  }
  size_t i = 0;
  std::vector<Token> tokens = parse_seq(s, i, s.size());
  if (tokens.empty()) throw ConfigError(msg("arch \"", s, "\": empty"));

  NetworkSpec spec;
  spec.t = t;
  spec.input_shape = input_shape;
  Shape cur = input_shape;

  for (const Token& tok : tokens) {
    const std::string& w = tok.text;
    LayerDesc d;
    size_t j = 0;
    if (w.size() >= 3 && w[0] == 'F' && w[1] == 'C') {
      j = 2;
      d.kind = LayerKind::kFC;
      d.out_features = read_int(w, j, tok.pos);
      if (j != w.size() || d.out_features < 1) {
        fail(s, tok.pos, msg("malformed token \"", w, "\""));
      }
      if (cur.size() == 3) {
        LayerDesc fl;
        fl.kind = LayerKind::kFlatten;
        fl.in_shape = cur;
        fl.out_shape = {numel(cur)};
        spec.layers.push_back(fl);
        cur = fl.out_shape;
      }
      d.in_shape = cur;
      d.fan_in = cur[0];
      d.out_shape = {d.out_features};
    } else if (w.size() >= 4 && w[0] == 'C') {
      j = 1;
      d.kind = LayerKind::kConv;
      d.out_channels = read_int(w, j, tok.pos);
      if (j >= w.size() || w[j] != 'K') {
        fail(s, tok.pos, msg("malformed token \"", w, "\""));
      }
      ++j;
      d.kernel = read_int(w, j, tok.pos);
      if (j != w.size() || d.out_channels < 1 || d.kernel < 1) {
        fail(s, tok.pos, msg("malformed token \"", w, "\""));
      }
      if (cur.size() != 3) {
        fail(s, tok.pos, "convolution needs a spatial [C,H,W] input");
      }
      const int64_t oh = cur[1] - d.kernel + 1, ow = cur[2] - d.kernel + 1;
      if (oh < 1 || ow < 1) {
        fail(s, tok.pos, msg("kernel ", d.kernel, " underflows ", cur[1], "x",
                             cur[2], " input"));
      }
      d.in_shape = cur;
      d.fan_in = cur[0] * d.kernel * d.kernel;
      d.out_shape = {d.out_channels, oh, ow};
    } else if (w.size() >= 2 && w[0] == 'P') {
      j = 1;
      d.kind = pool == PoolKind::kAvg ? LayerKind::kAvgPool : LayerKind::kMaxPool;
      d.pool_size = read_int(w, j, tok.pos);
      if (j != w.size() || d.pool_size < 1) {
        fail(s, tok.pos, msg("malformed token \"", w, "\""));
      }
      if (cur.size() != 3) fail(s, tok.pos, "pooling needs a [C,H,W] input");
      if (cur[1] % d.pool_size != 0 || cur[2] % d.pool_size != 0) {
        fail(s, tok.pos, msg("pool ", d.pool_size, " does not divide ", cur[1],
                             "x", cur[2]));
      }
      d.in_shape = cur;
      d.out_shape = {cur[0], cur[1] / d.pool_size, cur[2] / d.pool_size};
    } else {
      fail(s, tok.pos, msg("unknown token \"", w, "\""));
    }
    cur = d.out_shape;
    spec.layers.push_back(d);
  }
  if (!spec.layers.back().synaptic()) {
    throw ConfigError(
        msg("arch \"", s, "\": last layer must be FC or conv (the classifier)"));
  }
  return spec;
}

std::string render_arch(const NetworkSpec& spec) {
  std::string out;
  for (const auto& l : spec.layers) {
    if (l.kind == LayerKind::kFlatten) continue;
    if (!out.empty()) out += "-";
    switch (l.kind) {
      case LayerKind::kFC:
        out += "FC" + std::to_string(l.out_features);
        break;
      case LayerKind::kConv:
        out += "C" + std::to_string(l.out_channels) + "K" +
               std::to_string(l.kernel);
        break;
      case LayerKind::kAvgPool:
      case LayerKind::kMaxPool:
        out += "P" + std::to_string(l.pool_size);
        break;
      case LayerKind::kFlatten:
        break;
    }
  }
  return out;
}

}  // namespace ettfs
