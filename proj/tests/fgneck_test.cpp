/* Copyright 2026 The fgseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "fgseg/fgneck/neck.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fgseg/error.hpp"
#include "fgseg/tensor/grad_check.hpp"
#include "fgseg/tensor/ops.hpp"
#include "test_util.hpp"

namespace fgseg::fgneck {
namespace {

using fgseg::testing::max_abs_diff;
using fgseg::testing::random_tensor;

NeckParams random_params(std::size_t c_in, std::size_t c_k, std::size_t c_v,
                         std::mt19937_64& rng, bool grad = false) {
  return {random_tensor({c_k, c_in, 1, 1}, rng, grad), random_tensor({c_k}, rng, grad),
          random_tensor({c_v, c_in, 3, 3}, rng, grad), random_tensor({c_v}, rng, grad)};
}

Tensor weights(std::initializer_list<double> w) {
  return Tensor({w.size() / 2, 2}, std::vector<double>(w));
}

// Same-padded convolution by direct summation.
std::vector<double> naive_conv(const Tensor& x, const Tensor& k, const Tensor& b) {
  const auto& s = x.shape();
  const std::size_t n = s[0], c = s[1], h = s[2], w = s[3];
  const std::size_t o = k.dim(0), ks = k.dim(2), pad = ks / 2;
  std::vector<double> out(n * o * h * w);
  for (std::size_t ni = 0; ni < n; ++ni)
    for (std::size_t oi = 0; oi < o; ++oi)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t xx = 0; xx < w; ++xx) {
          double acc = b.values()[oi];
          for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t dy = 0; dy < ks; ++dy)
              for (std::size_t dx = 0; dx < ks; ++dx) {
                const long sy = static_cast<long>(y + dy) - static_cast<long>(pad);
                const long sx = static_cast<long>(xx + dx) - static_cast<long>(pad);
                if (sy < 0 || sx < 0 || sy >= static_cast<long>(h) || sx >= static_cast<long>(w))
                  continue;
                acc += x.values()[((ni * c + ci) * h + sy) * w + sx] *
                       k.values()[((oi * c + ci) * ks + dy) * ks + dx];
              }
          out[((ni * o + oi) * h + y) * w + xx] = acc;
        }
  return out;
}

TEST(NeckConfig, DefaultsAndValidation) {
  const NeckConfig r = NeckConfig{16}.resolved();
  EXPECT_EQ(r.c_k, 2u);
  EXPECT_EQ(r.c_v, 8u);
  EXPECT_THROW((NeckConfig{16, 16, 8}.resolved()), ValueError);
  EXPECT_THROW((NeckConfig{16, 2, 17}.resolved()), ValueError);
  EXPECT_EQ(parse_axis(axis_name(AttentionAxis::kCurrent)), AttentionAxis::kCurrent);
  EXPECT_THROW(parse_axis("rows"), ValueError);
}

TEST(EncodeKv, ZeroFeatureGivesBias) {
  std::mt19937_64 rng(401);
  NeckParams p = random_params(16, 2, 8, rng);
  const Tensor zero = Tensor::zeros({1, 16, 4, 5});
  const KeyValue kv = encode_kv(zero, p);
  EXPECT_EQ(kv.key.shape(), (Shape{1, 2, 4, 5}));
  EXPECT_EQ(kv.value.shape(), (Shape{1, 8, 4, 5}));
  for (std::size_t i = 0; i < kv.key.numel(); ++i) {
    EXPECT_EQ(kv.key.values()[i], p.key_bias.values()[i / 20]);
  }
  p.value_bias = Tensor::zeros({8});
  const KeyValue unbiased = encode_kv(zero, p);
  for (double v : unbiased.value.values()) EXPECT_EQ(v, 0.0);
}

TEST(EncodeKv, MatchesLoopOracle) {
  std::mt19937_64 rng(402);
  const NeckParams p = random_params(16, 2, 8, rng);
  const Tensor x = random_tensor({2, 16, 5, 6}, rng);
  const KeyValue kv = encode_kv(x, p);
  EXPECT_LT(max_abs_diff(kv.key.values(), naive_conv(x, p.key_kernel, p.key_bias)), 1e-12);
  EXPECT_LT(max_abs_diff(kv.value.values(), naive_conv(x, p.value_kernel, p.value_bias)), 1e-12);
  EXPECT_THROW(encode_kv(random_tensor({1, 15, 5, 6}, rng), p), DimensionError);
}

TEST(ApplyWeights, Examples) {
  const Tensor ones = Tensor::full({1, 2, 3, 2, 2}, 1.0);
  const Tensor a = apply_weights(ones, weights({1.0, 0.0}));
  for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(a.values()[i], 1.0);
  for (std::size_t i = 12; i < 24; ++i) EXPECT_EQ(a.values()[i], 0.0);
  const Tensor h = apply_weights(ones, weights({0.5, 0.5}));
  for (double v : h.values()) EXPECT_EQ(v, 0.5);
  const Tensor q = apply_weights(ones, weights({0.25, 0.75}));
  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < 12; ++i) m0 += q.values()[i] / 12;
  for (std::size_t i = 12; i < 24; ++i) m1 += q.values()[i] / 12;
  EXPECT_DOUBLE_EQ(m0, 0.25);
  EXPECT_DOUBLE_EQ(m1, 0.75);
  EXPECT_THROW(apply_weights(Tensor::full({1, 3, 3, 2, 2}, 1.0), weights({0.5, 0.5})),
               DimensionError);
}

TEST(AttentionMap, Examples) {
  // All-zero keys: uniform 1/(2M) in every column.
  const Tensor s = attention_map(Tensor::zeros({1, 2, 2, 3, 3}), Tensor::zeros({1, 2, 3, 3}));
  EXPECT_EQ(s.shape(), (Shape{1, 18, 9}));
  for (double v : s.values()) EXPECT_NEAR(v, 1.0 / 18.0, 1e-15);

  const Tensor d_k({1, 2, 1, 1, 1}, {1.0, 2.0});
  const Tensor e_k({1, 1, 1, 1}, {1.0});
  const Tensor t = attention_map(d_k, e_k);
  EXPECT_NEAR(t.values()[0], 0.26894, 1e-5);
  EXPECT_NEAR(t.values()[1], 0.73106, 1e-5);
}

TEST(AttentionMap, MatchesScoreOracleAndNormalizesTheChosenAxis) {
  std::mt19937_64 rng(403);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t b = 2, ck = 3, h = 2, w = 3, m = h * w;
    const Tensor d_k = random_tensor({b, 2, ck, h, w}, rng, false, -2.0, 2.0);
    const Tensor e_k = random_tensor({b, ck, h, w}, rng, false, -2.0, 2.0);
    const Tensor mem = attention_map(d_k, e_k, AttentionAxis::kMemory);
    const Tensor cur = attention_map(d_k, e_k, AttentionAxis::kCurrent);
    for (std::size_t bi = 0; bi < b; ++bi) {
      // Raw scores D_K^i . E_K^j and both normalizations by hand.
      std::vector<double> score(2 * m * m);
      for (std::size_t i = 0; i < 2 * m; ++i) {
        const std::size_t n = i / m, p = i % m;
        for (std::size_t j = 0; j < m; ++j) {
          double acc = 0;
          for (std::size_t c = 0; c < ck; ++c) {
            acc += d_k.values()[(((bi * 2 + n) * ck + c) * m) + p] *
                   e_k.values()[((bi * ck + c) * m) + j];
          }
          score[i * m + j] = acc;
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        double z = 0, col = 0;
        for (std::size_t i = 0; i < 2 * m; ++i) z += std::exp(score[i * m + j]);
        for (std::size_t i = 0; i < 2 * m; ++i) {
          const double got = mem.values()[bi * 2 * m * m + i * m + j];
          EXPECT_NEAR(got, std::exp(score[i * m + j]) / z, 1e-12);
          col += got;
        }
        EXPECT_NEAR(col, 1.0, 1e-9);
      }
      for (std::size_t i = 0; i < 2 * m; ++i) {
        double row = 0;
        for (std::size_t j = 0; j < m; ++j) row += cur.values()[bi * 2 * m * m + i * m + j];
        EXPECT_NEAR(row, 1.0, 1e-9);
      }
    }
  }
}

TEST(Retrieve, Examples) {
  const std::size_t m = 4, cv = 3;
  // Uniform attention over constant values returns the constant.
  const Tensor uniform = Tensor::full({1, 2 * m, m}, 1.0 / (2 * m));
  const Tensor v = Tensor::full({1, 2, cv, 2, 2}, 1.75);
  const Tensor constant = retrieve(uniform, v);
  for (double x : constant.values()) EXPECT_NEAR(x, 1.75, 1e-15);

  // One-hot column j -> memory position 5 copies that position's vector.
  std::mt19937_64 rng(404);
  const Tensor dv = random_tensor({1, 2, cv, 2, 2}, rng);
  std::vector<double> onehot(2 * m * m, 0.0);
  for (std::size_t j = 0; j < m; ++j) onehot[5 * m + j] = 1.0;
  const Tensor out = retrieve(Tensor({1, 2 * m, m}, onehot), dv);
  EXPECT_EQ(out.shape(), (Shape{1, cv, 2, 2}));
  for (std::size_t c = 0; c < cv; ++c) {
    for (std::size_t j = 0; j < m; ++j) {
      // Memory index 5 is frame 1, position 1.
      EXPECT_EQ(out.values()[c * m + j], dv.values()[(1 * cv + c) * m + 1]);
    }
  }
}

TEST(Retrieve, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(405);
  const std::size_t b = 2, cv = 4, m = 6;
  const Tensor s = random_tensor({b, 2 * m, m}, rng);
  const Tensor dv = random_tensor({b, 2, cv, 2, 3}, rng);
  const Tensor out = retrieve(s, dv);
  for (std::size_t bi = 0; bi < b; ++bi)
    for (std::size_t c = 0; c < cv; ++c)
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0;
        for (std::size_t i = 0; i < 2 * m; ++i) {
          const std::size_t n = i / m, p = i % m;
          acc += dv.values()[((bi * 2 + n) * cv + c) * m + p] *
                 s.values()[(bi * 2 * m + i) * m + j];
        }
        EXPECT_NEAR(out.values()[(bi * cv + c) * m + j], acc, 1e-12);
      }
}

TEST(Fuse, ConcatenatesRetrievedFirst) {
  std::mt19937_64 rng(406);
  const Tensor a = random_tensor({2, 3, 2, 2}, rng, true);
  const Tensor b = random_tensor({2, 3, 2, 2}, rng, true);
  const Tensor f = fuse(a, b);
  EXPECT_EQ(f.shape(), (Shape{2, 6, 2, 2}));
  EXPECT_EQ(max_abs_diff(slice(f, 1, 0, 3).values(), a.values()), 0.0);
  EXPECT_EQ(max_abs_diff(slice(f, 1, 3, 6).values(), b.values()), 0.0);
  const Tensor w = random_tensor({2, 6, 2, 2}, rng);
  const auto r = grad_check(
      [&](const std::vector<Tensor>& in) { return sum(mul(fuse(in[0], in[1]), w)); }, {a, b});
  EXPECT_LT(r.max_relative_error, 1e-6) << r.worst;
  EXPECT_THROW(fuse(a, random_tensor({2, 3, 2, 3}, rng)), DimensionError);
}

struct NeckInputs {
  Tensor cur, kmin, kmax;
  NeckParams params;
};

NeckInputs random_inputs(std::mt19937_64& rng, std::size_t b = 2, std::size_t c_in = 8,
                         std::size_t hw = 3, bool grad = false) {
  return {random_tensor({b, c_in, hw, hw}, rng, grad),
          random_tensor({b, c_in, hw, hw}, rng, grad),
          random_tensor({b, c_in, hw, hw}, rng, grad),
          random_params(c_in, c_in / 8, c_in / 2, rng, grad)};
}

TEST(NeckForward, ShapeAndIdenticalKeyFramesIgnoreWeights) {
  std::mt19937_64 rng(407);
  NeckInputs in = random_inputs(rng);
  const Tensor a = neck_forward(in.cur, in.kmin, in.kmin, weights({0.2, 0.8, 0.9, 0.1}),
                                in.params);
  const Tensor b = neck_forward(in.cur, in.kmin, in.kmin, weights({0.6, 0.4, 0.5, 0.5}),
                                in.params);
  EXPECT_EQ(a.shape(), (Shape{2, 8, 3, 3}));
  EXPECT_LT(max_abs_diff(a.values(), b.values()), 1e-12);
}

TEST(NeckForward, SwappingKeyFramesWithWeightsIsInvariant) {
  std::mt19937_64 rng(408);
  for (auto axis : {AttentionAxis::kMemory, AttentionAxis::kCurrent}) {
    NeckInputs in = random_inputs(rng);
    const Tensor a = neck_forward(in.cur, in.kmin, in.kmax, weights({0.3, 0.7, 0.1, 0.9}),
                                  in.params, axis);
    const Tensor b = neck_forward(in.cur, in.kmax, in.kmin, weights({0.7, 0.3, 0.9, 0.1}),
                                  in.params, axis);
    EXPECT_LT(max_abs_diff(a.values(), b.values()), 1e-12);
  }
}

TEST(NeckForward, ZeroWeightMasksThatKeyFrameValue) {
  std::mt19937_64 rng(409);
  NeckInputs in = random_inputs(rng, 1);
  for (int masked = 0; masked < 2; ++masked) {
    const Tensor w = masked ? weights({1.0, 0.0}) : weights({0.0, 1.0});
    const Tensor out = neck_forward(in.cur, in.kmin, in.kmax, w, in.params);

    const KeyValue cur = encode_kv(in.cur, in.params);
    KeyValue kmin = encode_kv(in.kmin, in.params), kmax = encode_kv(in.kmax, in.params);
    (masked ? kmax : kmin).value = Tensor::zeros(kmin.value.shape());
    const NeckMemory mem = stack_memory(cur, kmin, kmax);
    const Tensor ref = fuse(retrieve(attention_map(mem.d_k, mem.e_k), apply_weights(mem.d_v, w)),
                            mem.e_v);
    ASSERT_EQ(out.numel(), ref.numel());
    for (std::size_t i = 0; i < out.numel(); ++i) EXPECT_EQ(out.values()[i], ref.values()[i]);
  }
}

TEST(NeckForward, RetrievalIsConvexCombinationOfWeightedValues) {
  std::mt19937_64 rng(410);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    NeckInputs in = random_inputs(rng, 1, 8, 4);
    // Constant value fields: zero value kernel, bias c per channel.
    in.params.value_kernel = Tensor::zeros(in.params.value_kernel.shape());
    const double c = 0.5 + u(rng), wmin = u(rng);
    in.params.value_bias = Tensor::full({4}, c);
    const Tensor out =
        neck_forward(in.cur, in.kmin, in.kmax, weights({wmin, 1.0 - wmin}), in.params);
    const double lo = std::min(wmin, 1.0 - wmin) * c, hi = std::max(wmin, 1.0 - wmin) * c;
    const Tensor retrieved = slice(out, 1, 0, 4);
    for (double v : retrieved.values()) {
      EXPECT_GE(v, lo - 1e-12);
      EXPECT_LE(v, hi + 1e-12);
    }
    // The current frame's own value passes straight through.
    const Tensor passthrough = slice(out, 1, 4, 8);
    for (double v : passthrough.values()) EXPECT_EQ(v, c);
  }
}

// A plain sum is degenerate for the current-axis softmax (the summed output
// no longer depends on the keys), so the output is projected on a random
// direction instead.
TEST(NeckForward, EndToEndGradCheck) {
  std::mt19937_64 rng(411);
  for (int trial = 0; trial < 10; ++trial) {
    NeckInputs in = random_inputs(rng, 2, 8, 3, true);
    const Tensor w = Tensor({2, 2}, {0.3, 0.7, 0.8, 0.2}, true);
    const Tensor direction = random_tensor({2, 8, 3, 3}, rng);
    const auto axis = trial % 2 ? AttentionAxis::kCurrent : AttentionAxis::kMemory;
    const auto r = grad_check(
        [axis, &direction](const std::vector<Tensor>& x) {
          const NeckParams p{x[4], x[5], x[6], x[7]};
          return sum(mul(neck_forward(x[0], x[1], x[2], x[3], p, axis), direction));
        },
        {in.cur, in.kmin, in.kmax, w, in.params.key_kernel, in.params.key_bias,
         in.params.value_kernel, in.params.value_bias});
    EXPECT_LT(r.max_relative_error, 1e-4) << r.worst;
  }
}

TEST(NeckMacs, CountsEncodingAttentionAndRetrieval) {
  const NeckConfig cfg = NeckConfig{16}.resolved();  // c_k 2, c_v 8
  const std::size_t m = 16;
  const std::size_t encode = 3 * (2 * 16 * m + 8 * 16 * 9 * m);
  // Force weighting is a scaling, not a multiply-accumulate, and is not counted.
  const std::size_t scores = 2 * m * m * 2, retrieval = 8 * 2 * m * m;
  EXPECT_EQ(neck_macs(cfg, 4, 4), encode + scores + retrieval);
}

}  // namespace
}  // namespace fgseg::fgneck
