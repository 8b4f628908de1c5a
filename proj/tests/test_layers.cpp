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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ettfs/init.hpp"
#include "ettfs/network.hpp"
#include "testutil.hpp"

using namespace ettfs;
using namespace ettfs::testing;

TEST_CASE("parse_arch shapes the FC notation") {
  NetworkSpec spec = parse_arch("FC400-FC10", {784}, 8);
  REQUIRE(spec.layers.size() == 2);
  CHECK(spec.layers[0].fan_in == 784);
  CHECK(spec.layers[0].out_shape == Shape{400});
  CHECK(spec.layers[1].fan_in == 400);
  CHECK(spec.layers[1].out_shape == Shape{10});
  CHECK(spec.num_classes() == 10);
}

TEST_CASE("repeat groups expand in place, nesting allowed") {
  NetworkSpec twice = parse_arch("{FC10}*2", {5}, 4);
  REQUIRE(twice.layers.size() == 2);
  CHECK(render_arch(twice) == "FC10-FC10");

  NetworkSpec nested = parse_arch("{{C4K3}*2-P2}*2-FC10", {1, 16, 16}, 4);
  // C4K3, C4K3, P2, C4K3, C4K3, P2, flatten, FC10
  REQUIRE(nested.layers.size() == 8);
  CHECK(nested.layers[2].kind == LayerKind::kAvgPool);
  CHECK(nested.layers[6].kind == LayerKind::kFlatten);
  CHECK(render_arch(nested) == "C4K3-C4K3-P2-C4K3-C4K3-P2-FC10");
}

TEST_CASE("parse_arch propagates convolutional shapes") {
  NetworkSpec spec = parse_arch("C16K5-P2-C32K5-P2-FC128-FC10", {1, 28, 28}, 8);
  CHECK(spec.layers[0].out_shape == Shape{16, 24, 24});
  CHECK(spec.layers[1].out_shape == Shape{16, 12, 12});
  CHECK(spec.layers[2].out_shape == Shape{32, 8, 8});
  CHECK(spec.layers[2].fan_in == 16 * 25);
  CHECK(spec.layers[3].out_shape == Shape{32, 4, 4});
  CHECK(spec.layers[4].kind == LayerKind::kFlatten);
  CHECK(spec.layers[5].fan_in == 512);
  CHECK(spec.layers.back().out_shape == Shape{10});
}

TEST_CASE("parse errors carry the offending position") {
  auto expect_fail = [&](const std::string& s, const Shape& in,
                         const char* needle) {
    try {
      parse_arch(s, in, 8);
      FAIL_CHECK("expected ConfigError for ", s);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
      CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
  };
  expect_fail("FC10-XY3", {4}, "unknown token");
  expect_fail("FC", {4}, "unknown token");
  expect_fail("{FC10*2", {4}, "unbalanced");
  expect_fail("{FC10}2", {4}, "expected '*'");
  expect_fail("C8K9-FC10", {1, 5, 5}, "underflow");
  expect_fail("P3-FC10", {1, 8, 8}, "does not divide");
  expect_fail("FC10--FC10", {4}, "empty token");
}

TEST_CASE("pooling kind comes from the global flag") {
  NetworkSpec avg = parse_arch("C4K3-P2-FC10", {1, 6, 6}, 4, PoolKind::kAvg);
  NetworkSpec max = parse_arch("C4K3-P2-FC10", {1, 6, 6}, 4, PoolKind::kMax);
  CHECK(avg.layers[1].kind == LayerKind::kAvgPool);
  CHECK(max.layers[1].kind == LayerKind::kMaxPool);
  CHECK(render_arch(avg) == render_arch(max));
}

TEST_CASE("render round-trips through parse") {
  for (const char* s : {"FC400-FC10", "C16K5-P2-C32K5-P2-FC128-FC10",
                        "{FC32}*3-FC10"}) {
    const Shape in = s[0] == 'C' ? Shape{1, 28, 28} : Shape{64};
    NetworkSpec a = parse_arch(s, in, 8);
    NetworkSpec b = parse_arch(render_arch(a), in, 8);
    REQUIRE(a.layers.size() == b.layers.size());
    for (size_t i = 0; i < a.layers.size(); ++i) {
      CHECK(a.layers[i].kind == b.layers[i].kind);
      CHECK(a.layers[i].out_shape == b.layers[i].out_shape);
      CHECK(a.layers[i].fan_in == b.layers[i].fan_in);
    }
  }
}

TEST_CASE("single firing input reproduces its weight row as current") {
  NetworkSpec spec = parse_arch("FC3", {1}, 4);
  Network<float> net(spec, AmosConfig{}, NormMode::kOff);
  net.layer(0).w = Tensor<float>({1, 3}, {0.3f, -0.2f, 0.9f});

  Tensor<float> in({4, 1, 1});
  in.val()[2] = 1.f;  // the only unit fires at t=2
  std::vector<float> captured;
  net.forward(SpikeTensor<float>{in, true, true}, RunMode::kTrain,
              [&](size_t, const Tensor<float>& x) { captured = x.val(); });
  REQUIRE(captured.size() == 12);
  for (int64_t t = 0; t < 4; ++t) {
    CHECK(captured[size_t(t * 3 + 0)] == (t == 2 ? 0.3f : 0.f));
    CHECK(captured[size_t(t * 3 + 1)] == (t == 2 ? -0.2f : 0.f));
    CHECK(captured[size_t(t * 3 + 2)] == (t == 2 ? 0.9f : 0.f));
  }
}

TEST_CASE("zero weights in train mode fire everything at the last step") {
  NetworkSpec spec = parse_arch("FC5", {3}, 6);
  Network<float> net(spec, AmosConfig{}, NormMode::kOff);
  std::mt19937 rng(3);
  SpikeTensor<float> in{random_tensor<float>({6, 2, 3}, rng), false, false};
  for (auto& v : in.values.val()) v = v > 0 ? 1.f : 0.f;
  SpikeTensor<float> out = net.forward(in, RunMode::kTrain);
  for (int64_t t = 0; t < 6; ++t) {
    for (int64_t i = 0; i < 10; ++i) {
      CHECK(out.values.val()[size_t(t * 10 + i)] == (t == 5 ? 1.f : 0.f));
    }
  }
}

TEST_CASE("permuting the batch permutes the output identically") {
  NetworkSpec spec = parse_arch("FC8-FC4", {6}, 5);
  Network<float> net(spec, AmosConfig{}, NormMode::kAffine);
  init_weights(net, InitScheme{InitKind::kEttfs}, 77);

  std::mt19937 rng(8);
  const int64_t b = 3;
  Tensor<float> x({5, b, 6});
  for (int64_t u = 0; u < b * 6; ++u) {
    const int64_t when = rng() % 5;
    x.val()[size_t(when * b * 6 + u)] = 1.f;
  }
  SpikeTensor<float> out = net.forward({x, true, true}, RunMode::kTrain);

  const std::vector<int64_t> perm{2, 0, 1};
  Tensor<float> xp({5, b, 6});
  for (int64_t t = 0; t < 5; ++t) {
    for (int64_t i = 0; i < b; ++i) {
      std::copy_n(x.data() + (t * b + perm[size_t(i)]) * 6, 6,
                  xp.data() + (t * b + i) * 6);
    }
  }
  SpikeTensor<float> outp = net.forward({xp, true, true}, RunMode::kTrain);
  for (int64_t t = 0; t < 5; ++t) {
    for (int64_t i = 0; i < b; ++i) {
      for (int64_t c = 0; c < 4; ++c) {
        CHECK(outp.values.val()[size_t((t * b + i) * 4 + c)] ==
              out.values.val()[size_t((t * b + perm[size_t(i)]) * 4 + c)]);
      }
    }
  }
}

TEST_CASE("average pooling keeps the unit time-sum for one-spike inputs") {
  std::mt19937 rng(55);
  for (int rep = 0; rep < 200; ++rep) {
    const int64_t t_len = 2 + rng() % 6;
    const int64_t hw = 2 * (1 + rng() % 3);
    const int64_t size = (hw % 4 == 0 && rng() % 2) ? 4 : 2;
    Tensor<float> x({t_len, 1, 1, hw, hw});
    for (int64_t u = 0; u < hw * hw; ++u) {
      const int64_t when = rng() % t_len;
      x.val()[size_t(when * hw * hw + u)] = 1.f;
    }
    Tensor<float> pooled = avg_pool2d(x, size);
    for (float s : time_sums(pooled)) {
      CHECK(s == doctest::Approx(1.f).epsilon(1e-6));
    }
  }
}

TEST_CASE("max pooling can break the one-spike characteristic") {
  // two units of one window firing at different steps -> time-sum 2
  Tensor<float> x({4, 1, 1, 2, 2});
  x.val()[size_t(0 * 4 + 0)] = 1.f;  // unit (0,0) at t=0
  x.val()[size_t(2 * 4 + 3)] = 1.f;  // unit (1,1) at t=2
  Tensor<float> pooled = max_pool2d(x, 2);
  const std::vector<float> sums = time_sums(pooled);
  CHECK(sums[0] == 2.f);
  CHECK(pooled.val()[0] == 1.f);
  CHECK(pooled.val()[2] == 1.f);

  // a single firing unit keeps sum 1; an empty window stays silent
  Tensor<float> one({4, 1, 1, 2, 2});
  one.val()[size_t(1 * 4 + 2)] = 1.f;
  CHECK(time_sums(max_pool2d(one, 2))[0] == 1.f);
  Tensor<float> zero({4, 1, 1, 2, 2});
  Tensor<float> zero_pooled = max_pool2d(zero, 2);
  for (float v : zero_pooled.val()) CHECK(v == 0.f);
}

TEST_CASE("train-mode one-spike invariant survives a conv-pool-fc stack") {
  NetworkSpec spec = parse_arch("C3K3-P2-FC6", {1, 6, 6}, 5);
  Network<float> net(spec, AmosConfig{}, NormMode::kAffine);
  init_weights(net, InitScheme{InitKind::kEttfs}, 5);
  std::mt19937 rng(6);
  Tensor<float> x({5, 2, 1, 6, 6});
  for (int64_t u = 0; u < 2 * 36; ++u) {
    x.val()[size_t((rng() % 5) * 2 * 36 + u)] = 1.f;
  }
  SpikeTensor<float> out = net.forward({x, true, true}, RunMode::kTrain);
  CHECK(out.binary);
  CHECK(out.unit_time_sum);
  for (float s : time_sums(out.values)) CHECK(s == 1.f);
}

TEST_CASE("weight sharing across time: gradients sum over all steps") {
  // smooth forward makes the whole unrolled layer differentiable; FD then
  // exercises the accumulation of the T per-step contributions into dW
  NetworkSpec spec = parse_arch("FC3", {4}, 3);
  AmosConfig amos;
  amos.smooth_forward = true;
  Network<double> net(spec, amos, NormMode::kOff);
  std::mt19937 rng(123);
  net.layer(0).w = random_tensor<double>({4, 3}, rng, 0.8);
  Tensor<double> w = net.layer(0).w;
  w.set_requires_grad(true);
  w.ensure_grad();
  w.zero_grad();

  Tensor<double> x({3, 2, 4});
  for (int64_t u = 0; u < 2 * 4; ++u) {
    x.val()[size_t((rng() % 3) * 8 + u)] = 1.0;
  }
  Tensor<double> probe = random_tensor<double>({3, 2, 3}, rng);

  auto forward = [&]() -> Tensor<double> {
    SpikeTensor<double> out = net.forward({x, true, true}, RunMode::kTrain);
    return sum_all(mul(out.values, probe));
  };
  Tape<double> tape;
  {
    TapeScope<double> scope(tape);
    tape.backward(forward());
  }
  std::vector<double> analytic(w.grad().begin(), w.grad().end());
  auto fd = fd_gradient([&] { return forward().item(); }, w, 1e-6);
  CHECK(max_rel_err(analytic, fd) < 1e-4);
}

TEST_CASE("network rejects mismatched input shapes") {
  NetworkSpec spec = parse_arch("FC4", {9}, 3);
  Network<float> net(spec, AmosConfig{}, NormMode::kOff);
  Tensor<float> wrong({3, 1, 8});
  CHECK_THROWS_AS(net.forward({wrong, true, true}, RunMode::kTrain), ShapeError);
  Tensor<float> wrong_t({4, 1, 9});
  CHECK_THROWS_AS(net.forward({wrong_t, true, true}, RunMode::kTrain), ShapeError);
}
