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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "fgseg/error.hpp"
#include "fgseg/tensor/checkpoint.hpp"
#include "fgseg/tensor/grad_check.hpp"
#include "fgseg/tensor/kernels.hpp"
#include "fgseg/tensor/ops.hpp"
#include "test_util.hpp"

namespace fgseg {
namespace {

using testing::max_abs_diff;
using testing::random_tensor;

// Six nested loops, written independently of the library kernels.
std::vector<double> naive_conv(const Tensor& in, const Tensor& k, const Tensor& b,
                               std::size_t stride, std::size_t pad) {
  const auto& s = in.shape();
  const auto& ks = k.shape();
  const long H = s[2], W = s[3], K = ks[2];
  const long OH = (H + 2 * pad - K) / stride + 1, OW = (W + 2 * pad - K) / stride + 1;
  std::vector<double> out(s[0] * ks[0] * OH * OW);
  auto x = in.values();
  auto w = k.values();
  for (std::size_t n = 0; n < s[0]; ++n)
    for (std::size_t o = 0; o < ks[0]; ++o)
      for (long y = 0; y < OH; ++y)
        for (long xx = 0; xx < OW; ++xx) {
          double acc = b.defined() ? b.values()[o] : 0.0;
          for (std::size_t c = 0; c < s[1]; ++c)
            for (long i = 0; i < K; ++i)
              for (long j = 0; j < K; ++j) {
                const long iy = y * static_cast<long>(stride) + i - static_cast<long>(pad);
                const long ix = xx * static_cast<long>(stride) + j - static_cast<long>(pad);
                if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
                acc += w[((o * s[1] + c) * K + i) * K + j] *
                       x[((n * s[1] + c) * H + iy) * W + ix];
              }
          out[((n * ks[0] + o) * OH + y) * OW + xx] = acc;
        }
  return out;
}

TEST(Conv2d, OnesTimesScalarKernel) {
  Tensor x = Tensor::full({1, 1, 2, 2}, 1.0);
  Tensor k({1, 1, 1, 1}, {3.0});
  Tensor b({1}, {0.0});
  Tensor y = conv2d(x, k, b, 1, 0);
  ASSERT_EQ(y.shape(), (Shape{1, 1, 2, 2}));
  for (double v : y.values()) EXPECT_EQ(v, 3.0);
}

TEST(Conv2d, CenterTapKernelIsIdentity) {
  std::mt19937_64 rng(1);
  Tensor x = random_tensor({2, 1, 5, 6}, rng);
  std::vector<double> kv(9, 0.0);
  kv[4] = 1.0;
  Tensor y = conv2d(x, Tensor({1, 1, 3, 3}, kv), Tensor(), 1, 1);
  ASSERT_EQ(y.shape(), x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(y.values()[i], x.values()[i]);
}

TEST(Conv2d, MatchesNaiveLoopOracle) {
  std::mt19937_64 rng(2);
  Tensor x = random_tensor({2, 3, 5, 5}, rng);
  Tensor k = random_tensor({4, 3, 3, 3}, rng);
  Tensor b = random_tensor({4}, rng);
  Tensor y = conv2d(x, k, b, 1, 1);
  EXPECT_LE(max_abs_diff(y.values(), naive_conv(x, k, b, 1, 1)), 1e-12);
}

TEST(Conv2d, AllSupportedGeometriesMatchOracle) {
  std::mt19937_64 rng(3);
  for (std::size_t ksz = 1; ksz <= 3; ++ksz) {
    for (std::size_t stride = 1; stride <= 2; ++stride) {
      for (std::size_t pad = 0; pad <= ksz / 2 + 1; ++pad) {
        Tensor x = random_tensor({2, 3, 7, 6}, rng);
        Tensor k = random_tensor({5, 3, ksz, ksz}, rng);
        Tensor b = random_tensor({5}, rng);
        Tensor y = conv2d(x, k, b, stride, pad);
        const std::size_t oh = (7 + 2 * pad - ksz) / stride + 1;
        EXPECT_EQ(y.dim(2), oh);
        EXPECT_LE(max_abs_diff(y.values(), naive_conv(x, k, b, stride, pad)), 1e-12)
            << "k=" << ksz << " s=" << stride << " p=" << pad;
      }
    }
  }
}

TEST(Conv2d, RejectsChannelMismatchAndBadStride) {
  Tensor x = Tensor::zeros({1, 2, 4, 4});
  EXPECT_THROW(conv2d(x, Tensor::zeros({1, 3, 3, 3}), Tensor(), 1, 1), DimensionError);
  EXPECT_THROW(conv2d(x, Tensor::zeros({1, 2, 5, 5}), Tensor(), 1, 2), DimensionError);
  EXPECT_THROW(conv2d(x, Tensor::zeros({1, 2, 3, 3}), Tensor(), 3, 1), ValueError);
}

TEST(Kernels, ParallelBackwardMatchesReference) {
  std::mt19937_64 rng(4);
  for (std::size_t ksz = 1; ksz <= 3; ++ksz) {
    for (std::size_t stride = 1; stride <= 2; ++stride) {
      kernels::ConvGeometry g{3, 5, 9, 8, 6, ksz, stride, ksz / 2};
      Tensor x = random_tensor({g.input_size()}, rng);
      Tensor k = random_tensor({g.kernel_size()}, rng);
      Tensor gy = random_tensor({g.output_size()}, rng);
      std::vector<double> gx1(g.input_size()), gk1(g.kernel_size()), gb1(6);
      std::vector<double> gx2(gx1), gk2(gk1), gb2(gb1);
      kernels::reference::conv2d_backward(g, x.values(), k.values(), gy.values(),
                                          {gx1, gk1, gb1});
      kernels::parallel::conv2d_backward(g, x.values(), k.values(), gy.values(),
                                         {gx2, gk2, gb2});
      EXPECT_LE(max_abs_diff(gx1, gx2), 1e-12);
      EXPECT_LE(max_abs_diff(gk1, gk2), 1e-12);
      EXPECT_LE(max_abs_diff(gb1, gb2), 1e-12);
    }
  }
}

TEST(Kernels, UpsampleParallelMatchesReference) {
  std::mt19937_64 rng(5);
  kernels::UpsampleGeometry g{2, 5, 3, 4, 6};
  Tensor x = random_tensor({g.input_size()}, rng);
  Tensor k = random_tensor({g.kernel_size()}, rng);
  Tensor b = random_tensor({6}, rng);
  std::vector<double> y1(g.output_size()), y2(g.output_size());
  kernels::reference::upsample2_forward(g, x.values(), k.values(), b.values(), y1);
  kernels::parallel::upsample2_forward(g, x.values(), k.values(), b.values(), y2);
  EXPECT_LE(max_abs_diff(y1, y2), 1e-12);

  Tensor gy = random_tensor({g.output_size()}, rng);
  std::vector<double> gx1(g.input_size()), gk1(g.kernel_size()), gb1(6);
  std::vector<double> gx2(gx1), gk2(gk1), gb2(gb1);
  kernels::reference::upsample2_backward(g, x.values(), k.values(), gy.values(),
                                         {gx1, gk1, gb1});
  kernels::parallel::upsample2_backward(g, x.values(), k.values(), gy.values(),
                                        {gx2, gk2, gb2});
  EXPECT_LE(max_abs_diff(gx1, gx2), 1e-12);
  EXPECT_LE(max_abs_diff(gk1, gk2), 1e-12);
  EXPECT_LE(max_abs_diff(gb1, gb2), 1e-12);
}

TEST(Kernels, MatmulMatchesReference) {
  std::mt19937_64 rng(6);
  for (std::size_t rows : {1u, 3u, 4u, 9u}) {
    for (std::size_t cols : {1u, 8u, 13u, 300u}) {
      const std::size_t inner = 7, batch = 2;
      Tensor a = random_tensor({batch * rows * inner}, rng);
      Tensor b = random_tensor({batch * inner * cols}, rng);
      std::vector<double> c1(batch * rows * cols), c2(c1.size());
      kernels::reference::matmul(batch, rows, inner, cols, a.values(), b.values(), c1);
      kernels::parallel::matmul(batch, rows, inner, cols, a.values(), b.values(), c2);
      EXPECT_LE(max_abs_diff(c1, c2), 1e-12);
    }
  }
}

TEST(Softmax, Examples) {
  Tensor s0 = softmax(Tensor({2}, {0.0, 0.0}), 0);
  EXPECT_DOUBLE_EQ(s0.values()[0], 0.5);
  EXPECT_DOUBLE_EQ(s0.values()[1], 0.5);

  Tensor s1 = softmax(Tensor({2}, {1.0, 2.0}), 0);
  EXPECT_NEAR(s1.values()[0], 0.26894, 1e-5);
  EXPECT_NEAR(s1.values()[1], 0.73106, 1e-5);

  Tensor s2 = softmax(Tensor({2}, {3.0, 1003.0}), 0);
  EXPECT_NEAR(s2.values()[0], 0.0, 1e-300);
  EXPECT_NEAR(s2.values()[1], 1.0, 1e-15);
}

TEST(Softmax, SlicesSumToOneOnEveryAxis) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = random_tensor({3, 4, 5}, rng, false, -50.0, 50.0);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      Tensor y = softmax(x, axis);
      const std::size_t extent = x.dim(axis);
      std::size_t inner = 1;
      for (std::size_t a = axis + 1; a < 3; ++a) inner *= x.dim(a);
      const std::size_t outer = x.numel() / (extent * inner);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
          double total = 0.0;
          for (std::size_t a = 0; a < extent; ++a) {
            total += y.values()[(o * extent + a) * inner + i];
          }
          EXPECT_NEAR(total, 1.0, 1e-9);
        }
      }
    }
  }
  EXPECT_THROW(softmax(Tensor::zeros({2, 2}), 2), DimensionError);
}

TEST(Matmul, Examples) {
  std::mt19937_64 rng(8);
  Tensor b = random_tensor({3, 4}, rng);
  Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor ib = matmul(eye, b);
  for (std::size_t i = 0; i < b.numel(); ++i) EXPECT_EQ(ib.values()[i], b.values()[i]);

  Tensor p = matmul(Tensor({2, 2}, {1, 2, 3, 4}), Tensor({2, 1}, {5, 6}));
  ASSERT_EQ(p.shape(), (Shape{2, 1}));
  EXPECT_EQ(p.values()[0], 17.0);
  EXPECT_EQ(p.values()[1], 39.0);

  Tensor z = matmul(b, Tensor::zeros({4, 2}));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);

  EXPECT_THROW(matmul(b, Tensor::zeros({3, 2})), DimensionError);
}

TEST(Concat, Examples) {
  std::mt19937_64 rng(9);
  Tensor a = random_tensor({1, 2, 3, 3}, rng);
  Tensor b = random_tensor({1, 3, 3, 3}, rng);
  Tensor c = concat({a, b}, 1);
  ASSERT_EQ(c.shape(), (Shape{1, 5, 3, 3}));
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(c.values()[i], a.values()[i]);
  for (std::size_t i = 0; i < b.numel(); ++i) {
    EXPECT_EQ(c.values()[a.numel() + i], b.values()[i]);
  }

  Tensor empty = Tensor::zeros({1, 0, 3, 3});
  Tensor same = concat({a, empty}, 1);
  ASSERT_EQ(same.shape(), a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) EXPECT_EQ(same.values()[i], a.values()[i]);

  EXPECT_THROW(concat({a, Tensor::zeros({1, 2, 4, 3})}, 1), DimensionError);
}

TEST(Concat, GradientOfSumIsOnesInBothInputs) {
  std::mt19937_64 rng(10);
  Tensor a = random_tensor({2, 2, 2, 2}, rng, true);
  Tensor b = random_tensor({2, 3, 2, 2}, rng, true);
  sum(concat({a, b}, 1)).backward();
  for (double g : a.grad()) EXPECT_EQ(g, 1.0);
  for (double g : b.grad()) EXPECT_EQ(g, 1.0);

  auto report = grad_check(
      [](const std::vector<Tensor>& in) { return sum(concat({in[0], in[1]}, 1)); }, {a, b});
  EXPECT_LT(report.max_relative_error, 1e-9);
}

TEST(Elementwise, Examples) {
  std::mt19937_64 rng(11);
  Tensor x = random_tensor({2, 3}, rng, false, 0.1, 2.0);
  Tensor once = mul(x, Tensor::full({2, 3}, 1.0));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(once.values()[i], x.values()[i]);
  Tensor r = relu(scale(x, -1.0));
  for (double v : r.values()) EXPECT_EQ(v, 0.0);

  // 0.25 applied to the whole first-index slice 0 of a 2x4x3x3 block.
  Tensor block = random_tensor({2, 4, 3, 3}, rng);
  Tensor y = scale_leading(block, Tensor({2}, {0.25, 1.0}));
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t i = 0; i < 36; ++i) {
      const double expect = block.values()[n * 36 + i] * (n == 0 ? 0.25 : 1.0);
      EXPECT_EQ(y.values()[n * 36 + i], expect);
    }
  }
  EXPECT_THROW(scale_leading(block, Tensor::zeros({3})), DimensionError);
  EXPECT_THROW(add(block, Tensor::zeros({2, 4, 3})), DimensionError);
}

TEST(Relu, SubgradientAtZeroIsZero) {
  Tensor x({3}, {-1.0, 0.0, 2.0}, true);
  sum(relu(x)).backward();
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 0.0);
  EXPECT_EQ(x.grad()[2], 1.0);
}

TEST(MaxPool, Examples) {
  Tensor c = max_pool2(Tensor::full({1, 2, 4, 4}, 7.0));
  ASSERT_EQ(c.shape(), (Shape{1, 2, 2, 2}));
  for (double v : c.values()) EXPECT_EQ(v, 7.0);

  Tensor x({1, 1, 2, 2}, {1, 2, 3, 4}, true);
  Tensor p = max_pool2(x);
  EXPECT_EQ(p.item(), 4.0);
  sum(p).backward();
  EXPECT_EQ(x.grad()[3], 1.0);
  EXPECT_EQ(x.grad()[0] + x.grad()[1] + x.grad()[2], 0.0);

  EXPECT_THROW(max_pool2(Tensor::zeros({1, 1, 3, 4})), DimensionError);
}

TEST(Upsample, ConstantInputWithUniformKernel) {
  Tensor x = Tensor::full({1, 2, 3, 3}, 1.5);
  Tensor k = Tensor::full({2, 3, 2, 2}, 0.5);
  Tensor y = upsample2(x, k, Tensor());
  ASSERT_EQ(y.shape(), (Shape{1, 3, 6, 6}));
  for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 1.5);
}

TEST(Reshape, PermuteRoundTrip) {
  std::mt19937_64 rng(12);
  Tensor x = random_tensor({2, 3, 4}, rng);
  Tensor p = permute(x, {2, 0, 1});
  ASSERT_EQ(p.shape(), (Shape{4, 2, 3}));
  EXPECT_EQ(p.values()[(1 * 2 + 1) * 3 + 2], x.values()[(1 * 3 + 2) * 4 + 1]);
  Tensor back = permute(p, {1, 2, 0});
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(back.values()[i], x.values()[i]);
  EXPECT_THROW(reshape(x, {5, 5}), DimensionError);
  EXPECT_THROW(permute(x, {0, 0, 1}), DimensionError);
}

TEST(Graph, SharedSubexpressionVisitedOnce) {
  // y = (x*x) + (x*x) reuses one node twice; dy/dx = 4x.
  Tensor x({2}, {1.5, -2.0}, true);
  Tensor sq = mul(x, x);
  sum(add(sq, sq)).backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], -8.0);
}

TEST(Graph, NoGradGuardSkipsRecording) {
  Tensor x({1}, {2.0}, true);
  NoGradGuard guard;
  Tensor y = mul(x, x);
  EXPECT_FALSE(y.requires_grad());
}

TEST(Tensor, RejectsNonFiniteAndBadShape) {
  EXPECT_THROW(Tensor({2}, {1.0}), DimensionError);
  EXPECT_THROW(Tensor({1}, {std::nan("")}), NumericError);
  Tensor big({1}, {1e300});
  EXPECT_THROW(mul(big, big), NumericError);
}

TEST(Determinism, ForwardIsBitwiseRepeatable) {
  std::mt19937_64 rng(13);
  Tensor x = random_tensor({4, 3, 16, 16}, rng);
  Tensor k = random_tensor({8, 3, 3, 3}, rng);
  Tensor a = conv2d(x, k, Tensor(), 1, 1);
  Tensor b = conv2d(x, k, Tensor(), 1, 1);
  for (std::size_t i = 0; i < a.numel(); ++i) ASSERT_EQ(a.values()[i], b.values()[i]);
}

TEST(GradCheck, LinearOpIsExact) {
  std::mt19937_64 rng(14);
  Tensor x = random_tensor({3, 4}, rng, true);
  auto report = grad_check([](const std::vector<Tensor>& in) { return sum(scale(in[0], 3.0)); },
                           {x});
  EXPECT_LT(report.max_relative_error, 1e-9);
}

TEST(GradCheck, ConvAndSoftmaxRandomInstances) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor x = random_tensor({2, 2, 5, 5}, rng, true);
    Tensor k = random_tensor({3, 2, 3, 3}, rng, true);
    Tensor b = random_tensor({3}, rng, true);
    Tensor w = random_tensor({2, 3, 5, 5}, rng);
    auto conv_report = grad_check(
        [&w](const std::vector<Tensor>& in) {
          return sum(mul(conv2d(in[0], in[1], in[2], 1, 1), w));
        },
        {x, k, b});
    EXPECT_LT(conv_report.max_relative_error, 1e-4) << conv_report.worst;

    Tensor s = random_tensor({3, 5}, rng, true, -3.0, 3.0);
    Tensor ws = random_tensor({3, 5}, rng);
    auto softmax_report = grad_check(
        [&ws](const std::vector<Tensor>& in) { return sum(mul(softmax(in[0], 1), ws)); }, {s});
    EXPECT_LT(softmax_report.max_relative_error, 1e-4) << softmax_report.worst;
  }
}

TEST(Checkpoint, RoundTripsNamesShapesValuesAndMetadata) {
  std::mt19937_64 rng(16);
  Checkpoint ck;
  ck.metadata["variant"] = "fg_full";
  ck.metadata["epoch"] = "3";
  ck.tensors.emplace_back("encoder.0.weight", random_tensor({8, 1, 3, 3}, rng));
  ck.tensors.emplace_back("encoder.0.bias", random_tensor({8}, rng));
  const auto path = std::filesystem::temp_directory_path() / "fgseg_ck_test.bin";
  save_checkpoint(path, ck);
  Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.metadata, ck.metadata);
  ASSERT_EQ(back.tensors.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.tensors[i].first, ck.tensors[i].first);
    EXPECT_EQ(back.tensors[i].second.shape(), ck.tensors[i].second.shape());
    EXPECT_EQ(max_abs_diff(back.tensors[i].second.values(), ck.tensors[i].second.values()),
              0.0);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), DataError);
}

}  // namespace
}  // namespace fgseg
