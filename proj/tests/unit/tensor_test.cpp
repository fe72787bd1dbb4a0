#include <gtest/gtest.h>

#include <cmath>

#include "pickroute/error.hpp"
#include "pickroute/optim.hpp"
#include "pickroute/random.hpp"
#include "pickroute/tensor.hpp"

namespace pickroute::autodiff {
namespace {

constexpr double kTol = 1e-4;

Tensor random_variable(Shape shape, std::uint64_t seed, double lo = -1, double hi = 1) {
  Rng rng(seed);
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::variable(std::move(shape), std::move(v));
}

// u^T t w with generic u, w, so every coordinate gets a distinct upstream
// gradient.
Tensor weighted(const Tensor& t) {
  std::vector<double> u(t.rows()), w(t.cols());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(1.0 + static_cast<double>(i));
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::cos(0.5 + 2.0 * static_cast<double>(j));
  const auto left = Tensor::constant({1, t.rows()}, u);
  const auto right = Tensor::constant({t.cols(), 1}, w);
  return sum(matmul(matmul(left, t), right));
}

TEST(Tensor, ShapeContract) {
  EXPECT_THROW(Tensor::constant({2, 2}, {1, 2, 3}), ContractViolation);
  const auto a = Tensor::zeros({2, 3});
  const auto b = Tensor::zeros({3, 4});
  EXPECT_EQ(matmul(a, b).shape(), (Shape{2, 4}));
  try {
    matmul(a, a);
    FAIL();
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("(2,3)"), std::string::npos);
  }
  EXPECT_THROW(add(a, b), ContractViolation);
}

TEST(Tensor, MaskedSoftmaxExample) {
  const auto a = Tensor::constant({1, 3}, {1, 1, 1});
  const std::uint8_t mask[] = {0, 0, 1};
  const auto p = masked_softmax(a, mask);
  EXPECT_DOUBLE_EQ(p.at(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(p.at(0, 1), 0.5);
  EXPECT_EQ(p.at(0, 2), 0.0);
}

TEST(Tensor, MaskedSoftmaxRowsSumToOne) {
  const auto a = random_variable({6, 16}, 3, -10, 10);
  Rng rng(4);
  std::vector<std::uint8_t> mask(96);
  for (auto& m : mask) m = rng.uniform01() < 0.5;
  for (std::size_t r = 0; r < 6; ++r) mask[r * 16 + r] = 0;
  const auto p = masked_softmax(a, mask);
  for (std::size_t r = 0; r < 6; ++r) {
    double total = 0;
    for (std::size_t c = 0; c < 16; ++c) {
      total += p.at(r, c);
      if (mask[r * 16 + c]) EXPECT_EQ(p.at(r, c), 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Tensor, MaskedSoftmaxAllMaskedThrows) {
  const auto a = Tensor::constant({1, 2}, {0, 0});
  const std::uint8_t mask[] = {1, 1};
  EXPECT_THROW(masked_softmax(a, mask), ContractViolation);
}

TEST(Tensor, LayerNormConstantRowIsZero) {
  const auto a = Tensor::constant({1, 4}, {3, 3, 3, 3});
  const auto out = layer_norm(a, Tensor::constant({1, 4}, {1, 1, 1, 1}), Tensor::zeros({1, 4}));
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Gradients, Quadratic) {
  auto x = Tensor::variable({1, 1}, {3.0});
  std::vector<Tensor> leaves{x};
  const double err = finite_diff_check([&] { return sum(matmul(x, x)); }, leaves);
  EXPECT_LT(err, 1e-6);
  backward(sum(matmul(x, x)));
  EXPECT_NEAR(x.grad()[0], 6.0, 1e-12);
}

TEST(Gradients, ConstantFunction) {
  auto x = random_variable({2, 2}, 1);
  std::vector<Tensor> leaves{x};
  EXPECT_LT(finite_diff_check([] { return Tensor::scalar(4.0); }, leaves), 1e-12);
}

TEST(Gradients, UnusedParameterGetsNoGradient) {
  auto w = random_variable({2, 2}, 1);
  auto unused = random_variable({2, 2}, 2);
  backward(sum(w));
  EXPECT_TRUE(unused.grad().empty());
  std::vector<Parameter> params{{"w", w}, {"unused", unused}};
  const auto grads = collect_gradients(params);
  for (double g : grads[1]) EXPECT_EQ(g, 0.0);
}

TEST(Gradients, SecondBackwardWithoutResetThrows) {
  auto w = random_variable({2, 2}, 1);
  backward(sum(w));
  EXPECT_THROW(backward(sum(w)), ContractViolation);
  w.zero_grad();
  EXPECT_NO_THROW(backward(sum(w)));
}

TEST(Gradients, NonScalarLossThrows) {
  auto w = random_variable({2, 2}, 1);
  EXPECT_THROW(backward(w), ContractViolation);
}

TEST(Gradients, NoGradGuardStopsRecording) {
  auto w = random_variable({2, 2}, 1);
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    EXPECT_FALSE(sum(w).requires_grad());
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_TRUE(sum(w).requires_grad());
}

TEST(Gradients, MatmulOuterProduct) {
  auto w = random_variable({3, 4}, 1);
  auto x = random_variable({4, 2}, 2);
  std::vector<Tensor> leaves{w, x};
  EXPECT_LT(finite_diff_check([&] { return weighted(matmul(w, x)); }, leaves), kTol);
}

TEST(Gradients, EachPrimitive) {
  auto a = random_variable({3, 4}, 11);
  auto b = random_variable({3, 4}, 12);
  auto row = random_variable({1, 4}, 13);
  auto positive = random_variable({3, 4}, 14, 0.5, 2.0);
  auto gain = random_variable({1, 4}, 15, 0.5, 1.5);
  auto bias = random_variable({1, 4}, 16);
  std::vector<Tensor> ab{a, b}, arow{a, row}, pos{positive}, ln{a, gain, bias}, single{a};

  EXPECT_LT(finite_diff_check([&] { return weighted(add(a, b)); }, ab), kTol);
  EXPECT_LT(finite_diff_check([&] { return weighted(add(a, row)); }, arow), kTol);
  EXPECT_LT(finite_diff_check([&] { return weighted(scale(a, -2.5)); }, single), kTol);
  EXPECT_LT(finite_diff_check([&] { return weighted(relu(a)); }, single), kTol);
  EXPECT_LT(finite_diff_check([&] { return weighted(tanh(a)); }, single), kTol);
  EXPECT_LT(finite_diff_check([&] { return weighted(log(positive)); }, pos), kTol);
  EXPECT_LT(finite_diff_check([&] { return weighted(transpose(a)); }, single), kTol);
  EXPECT_LT(finite_diff_check([&] { return mean(a); }, single), kTol);
  EXPECT_LT(finite_diff_check([&] { return weighted(layer_norm(a, gain, bias)); }, ln), kTol);

  const std::uint8_t mask[] = {0, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0};
  EXPECT_LT(finite_diff_check([&] { return weighted(masked_softmax(a, mask)); }, single), kTol);

  EXPECT_LT(finite_diff_check(
                [&] {
                  auto parts = split_heads(a, 2);
                  std::swap(parts[0], parts[1]);
                  return weighted(concat_heads(parts));
                },
                single),
            kTol);
  const std::size_t rows[] = {2, 0, 2};
  EXPECT_LT(finite_diff_check([&] { return weighted(gather_rows(a, rows)); }, single), kTol);
  const std::size_t cols[] = {3, 0, 1};
  EXPECT_LT(finite_diff_check([&] { return weighted(pick(a, cols)); }, single), kTol);
}

TEST(Gradients, ComposedAttentionBlock) {
  auto x = random_variable({4, 6}, 21);
  auto wq = random_variable({6, 6}, 22);
  auto wk = random_variable({6, 6}, 23);
  std::vector<Tensor> leaves{x, wq, wk};
  std::vector<std::uint8_t> mask(16, 0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < i; ++j) mask[i * 4 + j] = 1;
  EXPECT_LT(finite_diff_check(
                [&] {
                  const auto q = matmul(x, wq);
                  const auto k = matmul(x, wk);
                  const auto att = masked_softmax(scale(matmul(q, transpose(k)), 0.4), mask);
                  return weighted(matmul(att, x));
                },
                leaves),
            kTol);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<Parameter> params{{"w", random_variable({2, 3}, 1)}};
  const std::vector<double> before(params[0].value.values().begin(), params[0].value.values().end());
  adam_step(params, zeros_like(params), AdamConfig{});
  const auto after = params[0].value.values();
  EXPECT_TRUE(std::equal(before.begin(), before.end(), after.begin()));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Parameter> params{{"w", Tensor::variable({1, 3}, {0, 0, 0})}};
  const GradientMap g{{0.3, -2.0, 1e-3}};
  AdamConfig cfg;
  adam_step(params, g, cfg);
  const auto v = params[0].value.values();
  for (std::size_t i = 0; i < 3; ++i) {
    const double expected = -cfg.learning_rate * g[0][i] / (std::abs(g[0][i]) + cfg.epsilon);
    EXPECT_NEAR(v[i], expected, 1e-15);
    EXPECT_NEAR(std::abs(v[i]), cfg.learning_rate, 1e-10);
  }
}

TEST(Adam, Deterministic) {
  auto run = [] {
    std::vector<Parameter> params{{"w", random_variable({2, 2}, 9)}};
    const GradientMap g{{0.1, -0.2, 0.3, 0.4}};
    for (int i = 0; i < 5; ++i) adam_step(params, g, AdamConfig{});
    const auto v = params[0].value.values();
    return std::vector<double>(v.begin(), v.end());
  };
  EXPECT_EQ(run(), run());
}

TEST(Adam, RejectsBadConfig) {
  AdamConfig cfg;
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), ContractViolation);
}

}  // namespace
}  // namespace pickroute::autodiff
