#include <gtest/gtest.h>

#include <cmath>

#include "csikd/adam.hpp"
#include "csikd/ops.hpp"
#include "csikd/tensor.hpp"
#include "support/test_util.hpp"

using namespace csikd;
using csikd::testing::check_gradients;
using csikd::testing::random_tensor;

namespace {

// Naive nested-loop cross-correlation with zero same-padding, the oracle
// conv2d is checked against.
std::vector<double> conv_oracle(const Tensor& in, const Tensor& k, const Tensor& b) {
  const int B = in.shape()[0], C = in.shape()[1], H = in.shape()[2], W = in.shape()[3];
  const int CO = k.shape()[0], KH = k.shape()[2], KW = k.shape()[3];
  const int ph = KH / 2, pw = KW / 2;
  std::vector<double> out(static_cast<std::size_t>(B) * CO * H * W, 0.0);
  for (int s = 0; s < B; ++s)
    for (int co = 0; co < CO; ++co)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
          double acc = b.values()[co];
          for (int ci = 0; ci < C; ++ci)
            for (int u = 0; u < KH; ++u)
              for (int v = 0; v < KW; ++v) {
                const int ii = i + u - ph, jj = j + v - pw;
                if (ii < 0 || ii >= H || jj < 0 || jj >= W) continue;
                acc += k.values()[((co * C + ci) * KH + u) * KW + v] *
                       in.values()[((s * C + ci) * H + ii) * W + jj];
              }
          out[((s * CO + co) * H + i) * W + j] = acc;
        }
  return out;
}

}  // namespace

TEST(Conv2d, IdentityKernel) {
  Rng rng(7);
  Tensor x = random_tensor({2, 1, 4, 4}, rng);
  Tensor k({1, 1, 1, 1}, {1.0});
  Tensor b({1}, {0.0});
  Tensor y = conv2d(x, k, b);
  EXPECT_EQ(y.shape(), (Shape{2, 1, 4, 4}));
  for (std::size_t i = 0; i < x.values().size(); ++i)
    EXPECT_DOUBLE_EQ(y.values()[i], x.values()[i]);
}

TEST(Conv2d, ZeroInputGivesBias) {
  Tensor x = Tensor::zeros({1, 2, 3, 3});
  Rng rng(3);
  Tensor k = random_tensor({4, 2, 3, 3}, rng);
  Tensor b({4}, {0.5, -1.0, 2.0, 0.0});
  Tensor y = conv2d(x, k, b);
  for (int co = 0; co < 4; ++co)
    for (int p = 0; p < 9; ++p)
      EXPECT_DOUBLE_EQ(y.values()[co * 9 + p], b.values()[co]);
}

TEST(Conv2d, MatchesNaiveLoopOracle) {
  Rng rng(11);
  Tensor x = random_tensor({1, 2, 5, 5}, rng);
  Tensor k = random_tensor({3, 2, 3, 3}, rng);
  Tensor b = random_tensor({3}, rng);
  Tensor y = conv2d(x, k, b);
  const auto ref = conv_oracle(x, k, b);
  ASSERT_EQ(y.values().size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.values()[i], ref[i], 1e-12);
}

TEST(Conv2d, EvenAndWideKernelsMatchOracle) {
  Rng rng(13);
  for (Shape kshape : {Shape{2, 3, 1, 9}, Shape{2, 3, 9, 1}, Shape{2, 3, 2, 2}, Shape{2, 3, 5, 5}}) {
    Tensor x = random_tensor({2, 3, 6, 7}, rng);
    Tensor k = random_tensor(kshape, rng);
    Tensor b = random_tensor({2}, rng);
    Tensor y = conv2d(x, k, b);
    const auto ref = conv_oracle(x, k, b);
    for (std::size_t i = 0; i < ref.size(); ++i)
      ASSERT_NEAR(y.values()[i], ref[i], 1e-12) << shape_str(kshape);
  }
}

TEST(Conv2d, ChannelMismatchRejected) {
  Tensor x = Tensor::zeros({1, 3, 4, 4});
  Tensor k = Tensor::zeros({2, 2, 3, 3});
  Tensor b = Tensor::zeros({2});
  EXPECT_THROW(conv2d(x, k, b), std::invalid_argument);
}

TEST(Conv2d, GradientMatchesFiniteDifferences) {
  Rng rng(17);
  Tensor x = random_tensor({2, 2, 4, 4}, rng);
  Tensor k = random_tensor({3, 2, 3, 3}, rng);
  Tensor b = random_tensor({3}, rng);
  Tensor target = random_tensor({2, 3, 4, 4}, rng);
  auto res = check_gradients({x, k, b}, [&] { return mse_loss(conv2d(x, k, b), target); });
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(Dense, IdentityWeight) {
  Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor w({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor b = Tensor::zeros({3});
  Tensor y = dense(x, w, b);
  for (std::size_t i = 0; i < x.values().size(); ++i)
    EXPECT_DOUBLE_EQ(y.values()[i], x.values()[i]);
}

TEST(Dense, AllOnesRowSum) {
  Tensor x({1, 4}, {1, 2, 3, 4});
  Tensor w = Tensor::full({2, 4}, 1.0);
  Tensor b = Tensor::zeros({2});
  Tensor y = dense(x, w, b);
  EXPECT_DOUBLE_EQ(y.values()[0], 10.0);
  EXPECT_DOUBLE_EQ(y.values()[1], 10.0);
}

TEST(Dense, LengthMismatchRejected) {
  Tensor x = Tensor::zeros({1, 4});
  Tensor w = Tensor::zeros({2, 5});
  Tensor b = Tensor::zeros({2});
  EXPECT_THROW(dense(x, w, b), std::invalid_argument);
}

TEST(Dense, GradientMatchesFiniteDifferences) {
  Rng rng(19);
  Tensor x = random_tensor({3, 5}, rng);
  Tensor w = random_tensor({4, 5}, rng);
  Tensor b = random_tensor({4}, rng);
  Tensor target = random_tensor({3, 4}, rng);
  auto res = check_gradients({x, w, b}, [&] { return mse_loss(dense(x, w, b), target); });
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(BatchNorm, TrainModeNormalizesPerChannel) {
  Rng rng(23);
  Tensor x = random_tensor({4, 3, 5, 5}, rng, -3.0, 7.0);
  Tensor gamma = Tensor::full({3}, 1.0);
  Tensor beta = Tensor::zeros({3});
  BatchNormState st(3);
  Tensor y = batch_norm(x, gamma, beta, st, BnMode::train);
  const int hw = 25, b = 4;
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (int s = 0; s < b; ++s)
      for (int k = 0; k < hw; ++k) mean += y.values()[(s * 3 + c) * hw + k];
    mean /= b * hw;
    for (int s = 0; s < b; ++s)
      for (int k = 0; k < hw; ++k) {
        const double d = y.values()[(s * 3 + c) * hw + k] - mean;
        var += d * d;
      }
    var /= b * hw;
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(var, 1.0, 1e-4);  // eps shifts variance slightly below 1
  }
}

TEST(BatchNorm, ConstantChannelMapsToZero) {
  Tensor x = Tensor::full({2, 1, 2, 2}, 5.0);
  Tensor gamma = Tensor::full({1}, 1.0);
  Tensor beta = Tensor::zeros({1});
  BatchNormState st(1);
  Tensor y = batch_norm(x, gamma, beta, st, BnMode::train);
  for (double v : y.values()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(BatchNorm, EvalModeMatchesClosedForm) {
  Tensor x({1, 2, 1, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor gamma({2}, {2.0, 0.5});
  Tensor beta({2}, {1.0, -1.0});
  BatchNormState st(2);
  st.running_mean = {0.5, 1.5};
  st.running_var = {4.0, 0.25};
  Tensor y = batch_norm(x, gamma, beta, st, BnMode::eval);
  auto closed = [&](double v, int c) {
    return (v - st.running_mean[c]) / std::sqrt(st.running_var[c] + st.eps) * gamma.values()[c] +
           beta.values()[c];
  };
  EXPECT_NEAR(y.values()[0], closed(1.0, 0), 1e-12);
  EXPECT_NEAR(y.values()[1], closed(2.0, 0), 1e-12);
  EXPECT_NEAR(y.values()[2], closed(3.0, 1), 1e-12);
  EXPECT_NEAR(y.values()[3], closed(4.0, 1), 1e-12);
}

TEST(BatchNorm, DegenerateBatchRejected) {
  Tensor x = Tensor::zeros({1, 2, 2, 2});
  Tensor gamma = Tensor::full({2}, 1.0);
  Tensor beta = Tensor::zeros({2});
  BatchNormState st(2);
  EXPECT_THROW(batch_norm(x, gamma, beta, st, BnMode::train), std::invalid_argument);
  EXPECT_NO_THROW(batch_norm(x, gamma, beta, st, BnMode::eval));
}

TEST(BatchNorm, RunningStatsUpdateWithMomentum) {
  Rng rng(29);
  Tensor x = random_tensor({4, 1, 2, 2}, rng);
  Tensor gamma = Tensor::full({1}, 1.0);
  Tensor beta = Tensor::zeros({1});
  BatchNormState st(1);
  double mean = 0.0;
  for (double v : x.values()) mean += v;
  mean /= 16.0;
  double var = 0.0;
  for (double v : x.values()) var += (v - mean) * (v - mean);
  var /= 16.0;
  batch_norm(x, gamma, beta, st, BnMode::train);
  EXPECT_NEAR(st.running_mean[0], 0.9 * 0.0 + 0.1 * mean, 1e-12);
  EXPECT_NEAR(st.running_var[0], 0.9 * 1.0 + 0.1 * var, 1e-12);
}

TEST(BatchNorm, GradientMatchesFiniteDifferences) {
  Rng rng(31);
  Tensor x = random_tensor({3, 2, 3, 3}, rng);
  Tensor gamma = random_tensor({2}, rng, 0.5, 1.5);
  Tensor beta = random_tensor({2}, rng);
  Tensor target = random_tensor({3, 2, 3, 3}, rng);
  BatchNormState st(2);
  auto train_res = check_gradients(
      {x, gamma, beta}, [&] { return mse_loss(batch_norm(x, gamma, beta, st, BnMode::train), target); });
  EXPECT_TRUE(train_res.ok) << train_res.detail;
  st.running_mean = {0.2, -0.1};
  st.running_var = {1.3, 0.7};
  auto eval_res = check_gradients(
      {x, gamma, beta}, [&] { return mse_loss(batch_norm(x, gamma, beta, st, BnMode::eval), target); });
  EXPECT_TRUE(eval_res.ok) << eval_res.detail;
}

TEST(LeakyRelu, ValuesAndGradient) {
  Tensor x({4}, {2.0, -2.0, 1.0, -1.0});
  x.set_requires_grad(true);
  Tensor y = leaky_relu(x);
  EXPECT_DOUBLE_EQ(y.values()[0], 2.0);
  EXPECT_DOUBLE_EQ(y.values()[1], -0.6);
  sum(y).backward();
  EXPECT_DOUBLE_EQ(x.grad()[2], 1.0);
  EXPECT_DOUBLE_EQ(x.grad()[3], 0.3);
}

TEST(Sigmoid, ValueStabilityAndGradient) {
  Tensor x({3}, {0.0, 50.0, -50.0});
  Tensor y = sigmoid(x);
  EXPECT_DOUBLE_EQ(y.values()[0], 0.5);
  EXPECT_GT(y.values()[1], 0.0);
  EXPECT_LE(y.values()[1], 1.0);
  EXPECT_GE(y.values()[2], 0.0);
  EXPECT_TRUE(std::isfinite(y.values()[1]) && std::isfinite(y.values()[2]));

  Rng rng(37);
  Tensor z = random_tensor({2, 4}, rng, -3.0, 3.0);
  Tensor target = random_tensor({2, 4}, rng);
  auto res = check_gradients({z}, [&] { return mse_loss(sigmoid(z), target); }, 1e-6, 1e-7);
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(SoftmaxT, KnownValuesAndProperties) {
  Tensor z({1, 2}, {0.0, 0.0});
  Tensor p = softmax_t(z, 3.0);
  EXPECT_DOUBLE_EQ(p.values()[0], 0.5);
  EXPECT_DOUBLE_EQ(p.values()[1], 0.5);

  Tensor z2({1, 2}, {1.0, 0.0});
  Tensor p2 = softmax_t(z2, 1.0);
  EXPECT_NEAR(p2.values()[0], 0.731059, 1e-6);
  EXPECT_NEAR(p2.values()[1], 0.268941, 1e-6);

  Tensor p3 = softmax_t(z2, 1000.0);
  EXPECT_NEAR(p3.values()[0], 0.5, 1e-3);
  EXPECT_NEAR(p3.values()[1], 0.5, 1e-3);

  EXPECT_THROW(softmax_t(z2, 0.0), std::invalid_argument);
  EXPECT_THROW(softmax_t(z2, -1.0), std::invalid_argument);
}

TEST(SoftmaxT, RowsSumToOneAcrossTemperatures) {
  Rng rng(41);
  Tensor z = random_tensor({5, 16}, rng, -100.0, 100.0);
  for (double t : {0.1, 1.0, 5.0, 100.0}) {
    Tensor p = softmax_t(z, t);
    for (int s = 0; s < 5; ++s) {
      double row = 0.0;
      for (int i = 0; i < 16; ++i) row += p.values()[s * 16 + i];
      EXPECT_NEAR(row, 1.0, 1e-12) << "t=" << t;
      for (int i = 0; i < 16; ++i) EXPECT_TRUE(std::isfinite(p.values()[s * 16 + i]));
    }
  }
}

TEST(SoftmaxT, TemperatureOneIsPlainSoftmaxBitwise) {
  Rng rng(43);
  Tensor z = random_tensor({3, 8}, rng, -5.0, 5.0);
  Tensor a = softmax_t(z, 1.0);
  Tensor b = softmax(z);
  for (std::size_t i = 0; i < a.values().size(); ++i)
    EXPECT_EQ(a.values()[i], b.values()[i]);
}

TEST(SoftmaxT, MaxProbabilityNonIncreasingInTemperature) {
  Rng rng(47);
  Tensor z = random_tensor({1, 12}, rng, -2.0, 2.0);
  double prev = 1.0;
  for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0}) {
    Tensor p = softmax_t(z, t);
    double mx = 0.0;
    for (double v : p.values()) mx = std::max(mx, v);
    EXPECT_LE(mx, prev + 1e-12) << "t=" << t;
    prev = mx;
  }
}

TEST(SoftmaxT, GradientMatchesFiniteDifferences) {
  Rng rng(53);
  Tensor z = random_tensor({2, 6}, rng, -2.0, 2.0);
  Tensor target = random_tensor({2, 6}, rng, 0.0, 1.0);
  for (double t : {0.5, 1.0, 5.0}) {
    auto res = check_gradients({z}, [&] { return mse_loss(softmax_t(z, t), target); });
    EXPECT_TRUE(res.ok) << "t=" << t << ": " << res.detail;
  }
}

TEST(MseLoss, ExamplesAndOracle) {
  Tensor a({2, 2}, {1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(mse_loss(a, a).item(), 0.0);

  Tensor p({3}, {3.0, 3.0, 3.0});
  Tensor t({3}, {1.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(mse_loss(p, t).item(), 4.0);

  Rng rng(59);
  Tensor x = random_tensor({4, 7}, rng);
  Tensor y = random_tensor({4, 7}, rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.values().size(); ++i) {
    const double d = x.values()[i] - y.values()[i];
    acc += d * d;
  }
  EXPECT_NEAR(mse_loss(x, y).item(), acc / 28.0, 1e-12);

  Tensor bad = Tensor::zeros({3, 3});
  EXPECT_THROW(mse_loss(x, bad), std::invalid_argument);
}

TEST(SoftCrossEntropy, UniformOneHotAndOracle) {
  Tensor u = Tensor::full({1, 4}, 0.25);
  EXPECT_NEAR(soft_cross_entropy(u, u).item(), std::log(4.0), 1e-12);

  Tensor onehot({1, 4}, {0, 0, 1, 0});
  Tensor q({1, 4}, {0.2, 0.3, 0.4, 0.1});
  EXPECT_NEAR(soft_cross_entropy(onehot, q).item(), -std::log(0.4), 1e-12);

  Rng rng(61);
  Tensor zt = random_tensor({3, 5}, rng);
  Tensor zs = random_tensor({3, 5}, rng);
  Tensor pt = softmax(zt), ps = softmax(zs);
  double acc = 0.0;
  for (std::size_t i = 0; i < pt.values().size(); ++i)
    acc -= pt.values()[i] * std::log(ps.values()[i]);
  EXPECT_NEAR(soft_cross_entropy(pt, ps).item(), acc / 3.0, 1e-12);
}

TEST(SoftCrossEntropy, GradientThroughSoftmax) {
  Rng rng(67);
  Tensor zt = random_tensor({2, 5}, rng);
  Tensor zs = random_tensor({2, 5}, rng);
  auto res = check_gradients(
      {zs}, [&] { return soft_cross_entropy(softmax_t(zt, 5.0), softmax_t(zs, 5.0)); });
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(StructuralOps, ConcatAddGateReshape) {
  Rng rng(71);
  Tensor a = random_tensor({2, 2, 2, 2}, rng);
  Tensor b = random_tensor({2, 2, 2, 2}, rng);
  Tensor c = concat_channels(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 4, 2, 2}));
  // order preserved: sample 0 holds a's channels then b's
  for (int k = 0; k < 8; ++k) {
    EXPECT_DOUBLE_EQ(c.values()[k], a.values()[k]);
    EXPECT_DOUBLE_EQ(c.values()[8 + k], b.values()[k]);
  }

  Tensor zero = Tensor::zeros({2, 2, 2, 2});
  Tensor s = add(a, zero);
  for (std::size_t i = 0; i < a.values().size(); ++i)
    EXPECT_DOUBLE_EQ(s.values()[i], a.values()[i]);

  Tensor alpha = Tensor::zeros({1});
  Tensor gated = scale_gate(a, alpha);
  for (double v : gated.values()) EXPECT_DOUBLE_EQ(v, 0.0);

  Tensor flat = flatten(a);
  EXPECT_EQ(flat.shape(), (Shape{2, 8}));
  Tensor back = reshape(flat, {2, 2, 2, 2});
  for (std::size_t i = 0; i < a.values().size(); ++i)
    EXPECT_DOUBLE_EQ(back.values()[i], a.values()[i]);

  EXPECT_THROW(add(a, Tensor::zeros({2, 2, 2, 3})), std::invalid_argument);
  EXPECT_THROW(reshape(a, {3, 3}), std::invalid_argument);
}

TEST(StructuralOps, Gradients) {
  Rng rng(73);
  Tensor a = random_tensor({2, 2, 2, 2}, rng);
  Tensor b = random_tensor({2, 1, 2, 2}, rng);
  Tensor alpha = random_tensor({1}, rng);
  Tensor target = random_tensor({2, 3, 2, 2}, rng);
  auto res = check_gradients({a, b, alpha}, [&] {
    return mse_loss(concat_channels(scale_gate(a, alpha), b), target);
  });
  EXPECT_TRUE(res.ok) << res.detail;
}

TEST(Backward, SumGivesOnes) {
  Rng rng(79);
  Tensor x = random_tensor({3, 4}, rng);
  x.set_requires_grad(true);
  sum(x).backward();
  for (double g : x.grad()) EXPECT_DOUBLE_EQ(g, 1.0);
}

TEST(Backward, MseAgainstZeroGives2xOverN) {
  Tensor x({4}, {1.0, -2.0, 3.0, 0.5});
  x.set_requires_grad(true);
  mse_loss(x, Tensor::zeros({4})).backward();
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(x.grad()[i], 2.0 * x.values()[i] / 4.0, 1e-15);
}

TEST(Backward, NonScalarLossRejected) {
  Tensor x = Tensor::zeros({2, 2});
  EXPECT_THROW(x.backward(), std::invalid_argument);
}

TEST(Backward, RepeatedCallsAccumulate) {
  Tensor x({2}, {1.0, 2.0});
  x.set_requires_grad(true);
  Tensor loss = sum(x);
  loss.backward();
  loss.backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], 2.0);
  x.zero_grad();
  loss.backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 1.0);
}

TEST(Backward, ComposedNetworkMatchesFiniteDifferences) {
  Rng rng(83);
  Tensor x = random_tensor({2, 2, 4, 4}, rng);
  Tensor k = random_tensor({2, 2, 3, 3}, rng, -0.5, 0.5);
  Tensor kb = random_tensor({2}, rng, -0.1, 0.1);
  Tensor gamma = random_tensor({2}, rng, 0.8, 1.2);
  Tensor beta = random_tensor({2}, rng, -0.1, 0.1);
  Tensor w = random_tensor({3, 32}, rng, -0.3, 0.3);
  Tensor wb = random_tensor({3}, rng, -0.1, 0.1);
  Tensor target = random_tensor({2, 3}, rng);
  BatchNormState st(2);
  auto forward = [&] {
    Tensor h = conv2d(x, k, kb);
    h = batch_norm(h, gamma, beta, st, BnMode::train);
    h = leaky_relu(h);
    h = flatten(h);
    h = dense(h, w, wb);
    return mse_loss(h, target);
  };
  auto res = check_gradients({x, k, kb, gamma, beta, w, wb}, forward);
  EXPECT_TRUE(res.ok) << res.detail << " worst rel " << res.worst_rel;
}

TEST(Backward, NoNanOrInfOnWideRangeInputs) {
  Rng rng(89);
  Tensor x = random_tensor({2, 2, 3, 3}, rng, -100.0, 100.0);
  Tensor k = random_tensor({2, 2, 3, 3}, rng, -100.0, 100.0);
  Tensor kb = random_tensor({2}, rng, -100.0, 100.0);
  Tensor gamma = random_tensor({2}, rng, 0.5, 100.0);
  Tensor beta = random_tensor({2}, rng, -100.0, 100.0);
  x.set_requires_grad(true);
  k.set_requires_grad(true);
  BatchNormState st(2);
  Tensor h = conv2d(x, k, kb);
  h = batch_norm(h, gamma, beta, st, BnMode::train);
  h = leaky_relu(h);
  h = sigmoid(h);
  h = flatten(h);
  Tensor p = softmax_t(h, 5.0);
  Tensor loss = soft_cross_entropy(p, p);
  loss.backward();
  EXPECT_TRUE(std::isfinite(loss.item()));
  for (double g : x.grad()) EXPECT_TRUE(std::isfinite(g));
  for (double g : k.grad()) EXPECT_TRUE(std::isfinite(g));
}

TEST(Adam, ZeroGradLeavesParamsUnchanged) {
  Parameter p("w", Tensor({2}, {1.0, -1.0}));
  p.tensor.zero_grad();
  adam_step(std::span<Parameter>(&p, 1), 0.001);
  EXPECT_DOUBLE_EQ(p.tensor.values()[0], 1.0);
  EXPECT_DOUBLE_EQ(p.tensor.values()[1], -1.0);
  EXPECT_EQ(p.step, 1);
}

TEST(Adam, FirstStepIsMinusLrOnUnitGrad) {
  // closed form: mhat = g, vhat = g^2, update = -lr * g / (|g| + eps)
  Parameter p("w", Tensor({1}, {0.5}));
  p.tensor.zero_grad();
  p.tensor.grad()[0] = 1.0;
  adam_step(std::span<Parameter>(&p, 1), 0.001);
  EXPECT_NEAR(p.tensor.values()[0], 0.5 - 0.001, 1e-9);
}

TEST(Adam, RepeatedIdenticalGradsMoveMonotonically) {
  Parameter p("w", Tensor({1}, {1.0}));
  double prev = 1.0;
  for (int i = 0; i < 20; ++i) {
    p.tensor.zero_grad();
    p.tensor.grad()[0] = 2.0;
    adam_step(std::span<Parameter>(&p, 1), 0.01);
    EXPECT_LT(p.tensor.values()[0], prev);
    prev = p.tensor.values()[0];
  }
}

TEST(Adam, MissingGradRejected) {
  Parameter p("w", Tensor({1}, {1.0}));
  EXPECT_THROW(adam_step(std::span<Parameter>(&p, 1), 0.001), std::runtime_error);
}
