#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "scnn/activation.hpp"
#include "scnn/adam.hpp"
#include "scnn/conv.hpp"
#include "scnn/error.hpp"
#include "scnn/tensor.hpp"

namespace scnn {
namespace {

using testing::max_relative_error;
using testing::norm_relative_error;
using testing::numeric_gradient;
using testing::random_conv;
using testing::random_tensor;
using testing::to_double;
using testing::weighted_sum;

TEST(Tensor4, DataLengthMatchesShape) {
  Tensor4 t({2, 3, 4, 5}, 1.5f);
  EXPECT_EQ(t.size(), 120u);
  EXPECT_FLOAT_EQ(t(1, 2, 3, 4), 1.5f);
  EXPECT_THROW(Tensor4({1, 1, 2, 2}, std::vector<float>(3)), ShapeError);
}

TEST(Tensor4, RowMajorLayout) {
  Tensor4 t({2, 2, 2, 2});
  for (std::size_t i = 0; i < t.size(); ++i) {
    t.data()[i] = static_cast<float>(i);
  }
  EXPECT_EQ(t(1, 0, 1, 0), 10.0f);
  EXPECT_EQ(t(0, 1, 0, 1), 5.0f);
}

TEST(Tensor4, RequireFiniteRejectsNanAndInf) {
  Tensor4 t({1, 1, 1, 2});
  EXPECT_NO_THROW(t.require_finite("t"));
  t.data()[1] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(t.require_finite("t"), NumericError);
  t.data()[1] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(t.require_finite("t"), NumericError);
}

TEST(Tensor4, OperationsRejectNonFiniteInput) {
  Tensor4 t({1, 1, 1, 2});
  t.data()[0] = std::numeric_limits<float>::infinity();
  EXPECT_THROW((void)relu(t), NumericError);
}

TEST(Tensor4, ConcatAndBatchHelpers) {
  Tensor4 a({1, 2, 2, 2}, 1.0f);
  Tensor4 b({1, 1, 2, 2}, 2.0f);
  const Tensor4 ab = concat_channels(a, b);
  EXPECT_EQ(ab.shape(), (Shape4{1, 3, 2, 2}));
  EXPECT_EQ(ab(0, 1, 1, 1), 1.0f);
  EXPECT_EQ(ab(0, 2, 0, 0), 2.0f);

  const std::vector<Tensor4> items{a, Tensor4({1, 2, 2, 2}, 3.0f)};
  const Tensor4 stacked = stack_batch(items);
  EXPECT_EQ(stacked.shape().n, 2u);
  EXPECT_EQ(batch_item(stacked, 1), items[1]);
  EXPECT_THROW((void)concat_channels(a, Tensor4({1, 1, 3, 2})), ShapeError);
}

TEST(Conv2dForward, ScalarKernelScales) {
  Tensor4 input({1, 1, 3, 3}, 1.0f);
  ConvLayerParams p = make_conv_params(1, 1, 1);
  p.weight.data()[0] = 2.0f;
  const Tensor4 out = conv2d_forward(input, p);
  EXPECT_EQ(out, Tensor4({1, 1, 3, 3}, 2.0f));
}

TEST(Conv2dForward, DeltaKernelIsIdentity) {
  std::mt19937_64 gen(1);
  const Tensor4 input = random_tensor({1, 1, 3, 3}, gen);
  ConvLayerParams p = make_conv_params(1, 1, 3, 1, 1);
  p.weight(0, 0, 1, 1) = 1.0f;
  EXPECT_EQ(conv2d_forward(input, p), input);
}

TEST(Conv2dForward, MatchesNestedLoopOracle) {
  std::mt19937_64 gen(2);
  const Tensor4 input = random_tensor({2, 3, 8, 8}, gen);
  const ConvLayerParams p = random_conv(4, 3, 3, 1, 1, gen);
  Shape4 shape;
  const std::vector<double> expected = testing::reference_conv(input, p, shape);
  const Tensor4 out = conv2d_forward(input, p);
  ASSERT_EQ(out.shape(), shape);
  EXPECT_LT(max_relative_error(out.data(), expected), 1e-6);
}

TEST(Conv2dForward, MatchesOracleOnRandomGeometries) {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  std::uniform_int_distribution<std::size_t> half_kernel(0, 2);
  std::uniform_int_distribution<std::size_t> stride_dist(1, 3);
  int checked = 0;
  while (checked < 50) {
    const std::size_t k = 2 * half_kernel(gen) + 1;
    const std::size_t stride = stride_dist(gen);
    const std::size_t pad = std::uniform_int_distribution<std::size_t>(0, k / 2)(gen);
    const Shape4 in{dim(gen), dim(gen), dim(gen), dim(gen)};
    if (in.h + 2 * pad < k || in.w + 2 * pad < k || (in.h + 2 * pad - k) % stride != 0 ||
        (in.w + 2 * pad - k) % stride != 0) {
      continue;
    }
    const Tensor4 input = random_tensor(in, gen);
    const ConvLayerParams p = random_conv(dim(gen), in.c, k, stride, pad, gen);
    Shape4 shape;
    const std::vector<double> expected = testing::reference_conv(input, p, shape);
    const Tensor4 out = conv2d_forward(input, p);
    ASSERT_EQ(out.shape(), shape) << in.to_string();
    EXPECT_LT(max_relative_error(out.data(), expected), 1e-6) << in.to_string() << " k=" << k;
    ++checked;
  }
}

TEST(Conv2dForward, SamePaddingPreservesSize) {
  for (std::size_t k = 1; k <= 7; k += 2) {
    const ConvLayerParams p = make_conv_params(2, 1, k, 1, (k - 1) / 2);
    const Tensor4 out = conv2d_forward(Tensor4({1, 1, 9, 7}), p);
    EXPECT_EQ(out.shape(), (Shape4{1, 2, 9, 7})) << "k=" << k;
  }
}

TEST(Conv2dForward, Errors) {
  const ConvLayerParams p = make_conv_params(1, 2, 3);
  EXPECT_THROW((void)conv2d_forward(Tensor4({1, 3, 5, 5}), p), ShapeError);
  ConvLayerParams strided = make_conv_params(1, 1, 3, 2, 0);
  EXPECT_THROW((void)conv2d_forward(Tensor4({1, 1, 6, 6}), strided), ConfigError);
  EXPECT_THROW((void)conv2d_forward(Tensor4({1, 1, 2, 2}), make_conv_params(1, 1, 3)), ConfigError);
  EXPECT_THROW((void)make_conv_params(1, 1, 2), ConfigError);
}

TEST(Conv2dBackward, ZeroGradOutGivesZeroGrads) {
  std::mt19937_64 gen(4);
  const Tensor4 input = random_tensor({1, 2, 5, 5}, gen);
  const ConvLayerParams p = random_conv(3, 2, 3, 1, 1, gen);
  const ConvGrads g = conv2d_backward(input, p, Tensor4({1, 3, 5, 5}));
  EXPECT_EQ(g.input, Tensor4(input.shape()));
  EXPECT_EQ(g.weight, Tensor4(p.weight.shape()));
  EXPECT_EQ(g.bias, std::vector<float>(3, 0.0f));
}

TEST(Conv2dBackward, ScalarChainRule) {
  const float x = 1.5f;
  const float w = -2.0f;
  const float g = 0.25f;
  ConvLayerParams p = make_conv_params(1, 1, 1);
  p.weight.data()[0] = w;
  const ConvGrads grads = conv2d_backward(Tensor4({1, 1, 1, 1}, x), p, Tensor4({1, 1, 1, 1}, g));
  EXPECT_EQ(grads.input.data()[0], w * g);
  EXPECT_EQ(grads.weight.data()[0], x * g);
  EXPECT_EQ(grads.bias[0], g);
}

TEST(Conv2dBackward, ShapeMismatch) {
  const ConvLayerParams p = make_conv_params(2, 1, 3, 1, 1);
  EXPECT_THROW((void)conv2d_backward(Tensor4({1, 1, 4, 4}), p, Tensor4({1, 2, 3, 3})), ShapeError);
}

struct ConvCase {
  Shape4 input;
  std::size_t out_c, k, stride, pad;
};

class Conv2dGradientCheck : public ::testing::TestWithParam<ConvCase> {};

TEST_P(Conv2dGradientCheck, MatchesFiniteDifferences) {
  const ConvCase c = GetParam();
  std::mt19937_64 gen(5 + c.k + c.stride);
  // Float rounding of each output adds FD noise proportional to |x|*|w|/step,
  // so keep values small enough that it sits well under the tolerance.
  Tensor4 input = random_tensor(c.input, gen, -0.25f, 0.25f);
  ConvLayerParams p = random_conv(c.out_c, c.input.c, c.k, c.stride, c.pad, gen, 0.25f);
  const Tensor4 probe = random_tensor(conv2d_output_shape(c.input, p), gen);
  const auto f = [&] { return weighted_sum(conv2d_forward(input, p), probe); };

  const ConvGrads g = conv2d_backward(input, p, probe);
  const auto check = [](std::span<const float> analytic, const std::vector<double>& numeric) {
    const std::vector<double> a = to_double(analytic);
    EXPECT_LT(norm_relative_error(a, numeric), 1e-4);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i], numeric[i], 1e-4 * std::max(1.0, std::abs(numeric[i]))) << "entry " << i;
    }
  };
  check(g.input.data(), numeric_gradient(input.data(), f));
  check(g.weight.data(), numeric_gradient(p.weight.data(), f));
  check(g.bias, numeric_gradient(p.bias, f));
}

INSTANTIATE_TEST_SUITE_P(Geometries, Conv2dGradientCheck,
                         ::testing::Values(ConvCase{{1, 2, 5, 5}, 3, 3, 1, 1}, ConvCase{{2, 1, 6, 6}, 2, 3, 1, 0},
                                           ConvCase{{1, 3, 7, 7}, 2, 3, 2, 1},
                                           ConvCase{{1, 2, 5, 5}, 2, 5, 1, 2}));

TEST(Relu, Definition) {
  const Tensor4 x({1, 1, 1, 3}, std::vector<float>{-1.0f, 0.0f, 2.0f});
  EXPECT_EQ(relu(x).vector(), (std::vector<float>{0.0f, 0.0f, 2.0f}));
  const Tensor4 g = relu_backward(x, Tensor4({1, 1, 1, 3}, 1.0f));
  EXPECT_EQ(g.vector(), (std::vector<float>{0.0f, 0.0f, 1.0f}));
}

TEST(Relu, AllNegative) {
  const Tensor4 x({1, 2, 3, 3}, -0.5f);
  EXPECT_EQ(relu(x), Tensor4(x.shape()));
  EXPECT_EQ(relu_backward(x, Tensor4(x.shape(), 3.0f)), Tensor4(x.shape()));
}

TEST(Relu, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 gen(6);
  Tensor4 x = random_tensor({2, 3, 4, 4}, gen);
  for (float& v : x.data()) {
    // Keep every input further than the FD step from the kink.
    v = std::copysign(0.01f + std::abs(v), v);
  }
  const Tensor4 probe = random_tensor(x.shape(), gen);
  const auto f = [&] { return weighted_sum(relu(x), probe); };
  const std::vector<double> numeric = numeric_gradient(x.data(), f);
  const Tensor4 analytic = relu_backward(x, probe);
  EXPECT_LT(norm_relative_error(to_double(analytic.data()), numeric), 1e-4);
}

TEST(MseLoss, IdentityAndConstantCases) {
  std::mt19937_64 gen(7);
  const Tensor4 a = random_tensor({2, 3, 4, 5}, gen);
  const LossResult same = mse_loss(a, a);
  EXPECT_EQ(same.loss, 0.0);
  EXPECT_EQ(same.grad, Tensor4(a.shape()));

  for (const Shape4 s : {Shape4{1, 1, 1, 1}, Shape4{2, 3, 4, 5}, Shape4{1, 3, 32, 32}}) {
    EXPECT_DOUBLE_EQ(mse_loss(Tensor4(s, 1.0f), Tensor4(s)).loss, 1.0);
  }
  EXPECT_THROW((void)mse_loss(a, Tensor4({1, 3, 4, 5})), ShapeError);
}

TEST(MseLoss, MatchesScalarLoop) {
  std::mt19937_64 gen(8);
  const Tensor4 pred = random_tensor({2, 3, 4, 5}, gen);
  const Tensor4 target = random_tensor(pred.shape(), gen);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data()[i]) - target.data()[i];
    sum += d * d;
  }
  const double expected = sum / static_cast<double>(pred.size());
  const LossResult r = mse_loss(pred, target);
  EXPECT_NEAR(r.loss, expected, 1e-6 * expected);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double g = 2.0 * (static_cast<double>(pred.data()[i]) - target.data()[i]) / pred.size();
    EXPECT_NEAR(r.grad.data()[i], g, 1e-6 * std::max(std::abs(g), 1e-3));
  }
}

TEST(MseLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(9);
  Tensor4 pred = random_tensor({1, 2, 3, 3}, gen);
  const Tensor4 target = random_tensor(pred.shape(), gen);
  const auto f = [&] { return mse_loss(pred, target).loss; };
  const std::vector<double> numeric = numeric_gradient(pred.data(), f);
  EXPECT_LT(norm_relative_error(to_double(mse_loss(pred, target).grad.data()), numeric), 1e-4);
}

TEST(MseLoss, NonNegativeAndZeroOnlyWhenEqual) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor4 a = random_tensor({1, 2, 3, 3}, gen);
    Tensor4 b = a;
    EXPECT_EQ(mse_loss(a, b).loss, 0.0);
    b.data()[static_cast<std::size_t>(trial) % b.size()] += 1e-3f;
    EXPECT_GT(mse_loss(a, b).loss, 0.0);
  }
}

TEST(MaskedMseLoss, AveragesOverHole) {
  const Tensor4 pred({1, 2, 1, 2}, std::vector<float>{1.0f, 3.0f, 1.0f, 3.0f});
  const Tensor4 target({1, 2, 1, 2});
  const Tensor4 mask({1, 1, 1, 2}, std::vector<float>{0.0f, 1.0f});
  const LossResult r = masked_mse_loss(pred, target, mask);
  EXPECT_DOUBLE_EQ(r.loss, 9.0);
  EXPECT_EQ(r.grad(0, 0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(r.grad(0, 1, 0, 1), 3.0f);
}

TEST(Adam, ZeroGradientLeavesFreshStateUnchanged) {
  std::vector<float> param{0.5f, -1.0f, 2.0f};
  const std::vector<float> before = param;
  AdamState state = AdamState::zeros(3);
  for (int i = 0; i < 5; ++i) {
    adam_step(param, std::vector<float>(3, 0.0f), state);
  }
  EXPECT_EQ(param, before);
  EXPECT_EQ(state.m, std::vector<float>(3, 0.0f));
  EXPECT_EQ(state.v, std::vector<float>(3, 0.0f));
  EXPECT_EQ(state.t, 5);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<float> param{0.0f};
  AdamState state = AdamState::zeros(1);
  adam_step(param, std::vector<float>{1.0f}, state);
  EXPECT_LT(std::abs(-param[0] - 0.001), 1e-6);
  EXPECT_EQ(state.t, 1);
}

TEST(Adam, MatchesScalarReferenceTraceBitwise) {
  std::mt19937_64 gen(11);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  Tensor4 param({1, 1, 2, 3});
  std::vector<testing::ScalarAdam> refs(param.size());
  std::vector<float> ref_param(param.size());
  for (std::size_t i = 0; i < param.size(); ++i) {
    param.data()[i] = ref_param[i] = dist(gen);
  }
  AdamState state = AdamState::zeros(param.size());
  for (int step = 0; step < 10; ++step) {
    Tensor4 grad(param.shape());
    for (float& g : grad.data()) {
      g = dist(gen);
    }
    adam_step(param, grad, state);
    for (std::size_t i = 0; i < param.size(); ++i) {
      ref_param[i] = refs[i].step(ref_param[i], grad.data()[i]);
      ASSERT_EQ(param.data()[i], ref_param[i]) << "step " << step << " entry " << i;
      ASSERT_EQ(state.m[i], refs[i].m);
      ASSERT_EQ(state.v[i], refs[i].v);
    }
  }
  EXPECT_EQ(state.t, 10);
}

TEST(Adam, ShapeMismatch) {
  std::vector<float> param(3);
  AdamState state = AdamState::zeros(3);
  EXPECT_THROW(adam_step(param, std::vector<float>(2), state), ShapeError);
  AdamState small = AdamState::zeros(2);
  EXPECT_THROW(adam_step(param, std::vector<float>(3), small), ShapeError);
}

}  // namespace
}  // namespace scnn
