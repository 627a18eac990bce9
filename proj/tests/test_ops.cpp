#include <gtest/gtest.h>

#include "support/oracles.hpp"

using grucnn::ContractError;
using grucnn::Rng;
using grucnn::Tensor;
namespace ops = grucnn::ops;
namespace gt = grucnn::testing;

TEST(Conv1dFreq, ZeroInputGivesBias) {
  Rng rng(1);
  Tensor y = ops::conv1d_freq(Tensor::zeros({5, 2}), gt::random_tensor(rng, {3, 2, 3}),
                              Tensor::from({3}, {0.5, -1.0, 2.0}));
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(y.at(k * 3 + 0), 0.5);
    EXPECT_EQ(y.at(k * 3 + 1), -1.0);
    EXPECT_EQ(y.at(k * 3 + 2), 2.0);
  }
}

TEST(Conv1dFreq, SingleBinIgnoresPadding) {
  Tensor y = ops::conv1d_freq(Tensor::from({1, 1}, {2}), Tensor::from({3, 1, 1}, {1, 1, 1}));
  EXPECT_EQ(y.item(), 2.0);
}

TEST(Conv1dFreq, MatchesNestedLoops) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor x = gt::random_tensor(rng, {5, 2});
    Tensor w = gt::random_tensor(rng, {3, 2, 3});
    Tensor b = gt::random_tensor(rng, {3});
    const auto bv = gt::vec(b);
    const auto ref = gt::conv1d_ref(gt::vec(x), 5, 2, gt::vec(w), 3, &bv);
    const Tensor y = ops::conv1d_freq(x, w, b);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.at(i), ref[i], 1e-12);
  }
}

TEST(Conv1dFreq, ShapeMismatchNamesDims) {
  try {
    ops::conv1d_freq(Tensor::zeros({5, 2}), Tensor::zeros({3, 3, 1}));
    FAIL();
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("[3 x 3 x 1]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ops::conv1d_freq(Tensor::zeros({5, 2}), Tensor::zeros({3, 2, 4}), Tensor::zeros({3})), ContractError);
}

TEST(Conv2dCausal, ZeroInputGivesBias) {
  Rng rng(3);
  Tensor y = ops::conv2d_causal(Tensor::zeros({4, 3, 2}), gt::random_tensor(rng, {3, 3, 2, 2}),
                                Tensor::from({2}, {0.25, -0.75}));
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_EQ(y.at(i), i % 2 == 0 ? 0.25 : -0.75);
}

TEST(Conv2dCausal, ImpulseOnlyAffectsLaterFrames) {
  std::vector<double> x(6 * 8, 0.0);
  x[3 * 8 + 4] = 1.0;  // bin 3, frame 4
  Tensor w = Tensor::full({3, 3, 1, 1}, 1.0);
  Tensor y = ops::conv2d_causal(Tensor::from({6, 8, 1}, x), w);
  for (std::size_t k = 0; k < 6; ++k) {
    for (std::size_t t = 0; t < 8; ++t) {
      const bool reach = t >= 4 && t <= 6 && k >= 2 && k <= 4;
      EXPECT_EQ(y.at(k * 8 + t), reach ? 1.0 : 0.0) << k << "," << t;
    }
  }
}

TEST(Conv2dCausal, MatchesNestedLoops) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor x = gt::random_tensor(rng, {6, 4, 2});
    Tensor w = gt::random_tensor(rng, {3, 3, 2, 3});
    Tensor b = gt::random_tensor(rng, {3});
    const auto bv = gt::vec(b);
    const auto ref = gt::conv2d_ref(gt::vec(x), 6, 4, 2, gt::vec(w), 3, &bv);
    const Tensor y = ops::conv2d_causal(x, w, b);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(y.at(i), ref[i], 1e-12);
  }
}

TEST(Conv2dCausal, PrefixIsBitIdentical) {
  Rng rng(5);
  const std::size_t k = 7, t_len = 20, cin = 3, cout = 4;
  Tensor x = gt::random_tensor(rng, {k, t_len, cin}, -1, 1, false);
  Tensor w = gt::random_tensor(rng, {3, 3, cin, cout}, -1, 1, false);
  const Tensor full = ops::conv2d_causal(x, w);
  for (std::size_t t = 1; t <= t_len; t += 6) {
    std::vector<double> prefix(k * t * cin);
    for (std::size_t kk = 0; kk < k; ++kk)
      for (std::size_t s = 0; s < t; ++s)
        for (std::size_t c = 0; c < cin; ++c) prefix[(kk * t + s) * cin + c] = x.at((kk * t_len + s) * cin + c);
    const Tensor part = ops::conv2d_causal(Tensor::from({k, t, cin}, prefix), w);
    for (std::size_t kk = 0; kk < k; ++kk)
      for (std::size_t s = 0; s < t; ++s)
        for (std::size_t o = 0; o < cout; ++o)
          ASSERT_EQ(part.at((kk * t + s) * cout + o), full.at((kk * t_len + s) * cout + o));
  }
}

TEST(Elementwise, AnalyticValues) {
  EXPECT_EQ(ops::sigmoid(Tensor::scalar(0)).item(), 0.5);
  EXPECT_EQ(ops::tanh(Tensor::scalar(0)).item(), 0.0);
  Tensor y = ops::prelu(Tensor::from({2, 1}, {-2, 3}), Tensor::from({1}, {0.25}));
  EXPECT_EQ(y.at(0), -0.5);
  EXPECT_EQ(y.at(1), 3.0);
  EXPECT_NEAR(ops::sigmoid(Tensor::scalar(-800)).item(), 0.0, 1e-300);
  EXPECT_EQ(ops::sigmoid(Tensor::scalar(800)).item(), 1.0);
}

TEST(Elementwise, HadamardMatchesLoop) {
  Rng rng(6);
  Tensor a = gt::random_tensor(rng, {4, 5});
  Tensor b = gt::random_tensor(rng, {4, 5});
  Tensor y = ops::hadamard(a, b);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(y.at(i), a.at(i) * b.at(i), 1e-15);
  EXPECT_THROW(ops::hadamard(a, gt::random_tensor(rng, {5, 4})), ContractError);
  EXPECT_THROW(ops::add(a, gt::random_tensor(rng, {20})), ContractError);
}

TEST(Elementwise, AffineCombination) {
  Tensor y = ops::affine_combination(Tensor::from({2}, {0.25, 1.0}), Tensor::from({2}, {4, 4}),
                                     Tensor::from({2}, {8, 8}));
  EXPECT_EQ(y.at(0), 7.0);
  EXPECT_EQ(y.at(1), 4.0);
}

TEST(Maxpool, CeilModeShapes) {
  EXPECT_EQ(ops::maxpool_freq2(Tensor::zeros({161, 2})).dim(0), 81u);
  EXPECT_EQ(ops::maxpool_freq2(Tensor::zeros({81, 2})).dim(0), 41u);
  EXPECT_EQ(ops::maxpool_freq2(Tensor::zeros({1, 3})).dim(0), 1u);
}

TEST(Maxpool, Definition) {
  Tensor x = Tensor::from({4, 1}, {1, 5, 3, 2}, true);
  Tensor y = ops::maxpool_freq2(x);
  EXPECT_EQ(y.at(0), 5.0);
  EXPECT_EQ(y.at(1), 3.0);
  ops::sum(y).backward();
  EXPECT_EQ(gt::vec(Tensor::from({4}, {x.grad().begin(), x.grad().end()})), (std::vector<double>{0, 1, 1, 0}));
}

TEST(Dense, IdentityAndBias) {
  Tensor eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor x = Tensor::from({3}, {0.5, -2, 7});
  EXPECT_EQ(gt::vec(ops::dense(x, eye, Tensor::zeros({3}))), gt::vec(x));
  Tensor b = Tensor::from({2}, {0.1, 0.2});
  EXPECT_EQ(gt::vec(ops::dense(Tensor::zeros({3}), Tensor::full({3, 2}, 4.0), b)), gt::vec(b));
}

TEST(Dense, MatchesLoopForVectorsAndRows) {
  Rng rng(8);
  Tensor w = gt::random_tensor(rng, {7, 4});
  Tensor b = gt::random_tensor(rng, {4});
  Tensor x = gt::random_tensor(rng, {37, 7});
  const Tensor rows = ops::dense(x, w, b);
  for (std::size_t r = 0; r < 37; ++r) {
    const Tensor single = ops::dense(ops::row(x, r), w, b);
    for (std::size_t m = 0; m < 4; ++m) {
      double acc = b.at(m);
      for (std::size_t n = 0; n < 7; ++n) acc += x.at(r * 7 + n) * w.at(n * 4 + m);
      EXPECT_NEAR(rows.at(r * 4 + m), acc, 1e-12);
      EXPECT_NEAR(single.at(m), acc, 1e-12);
    }
  }
}

TEST(Dense, RowResultsIndependentOfRowCount) {
  Rng rng(9);
  Tensor w = gt::random_tensor(rng, {30, 11}, -1, 1, false);
  Tensor x = gt::random_tensor(rng, {40, 30}, -1, 1, false);
  const Tensor full = ops::dense(x, w);
  for (std::size_t n : {1u, 5u, 16u, 17u, 33u}) {
    std::vector<double> head(x.data().begin(), x.data().begin() + static_cast<std::ptrdiff_t>(n * 30));
    const Tensor part = ops::dense(Tensor::from({n, 30}, head), w);
    for (std::size_t i = 0; i < part.numel(); ++i) ASSERT_EQ(part.at(i), full.at(i));
  }
}

// Finite-difference checks on random small instances.

TEST(GradCheck, Conv1dFreq) {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Tensor> in{gt::random_tensor(rng, {5, 2}), gt::random_tensor(rng, {3, 2, 3}),
                           gt::random_tensor(rng, {3})};
    Tensor proj = gt::random_tensor(rng, {5, 3}, -1, 1, false);
    EXPECT_LT(gt::gradcheck([&](const auto& v) { return gt::project(ops::conv1d_freq(v[0], v[1], v[2]), proj); }, in),
              1e-4);
  }
}

TEST(GradCheck, Conv2dCausal) {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Tensor> in{gt::random_tensor(rng, {4, 3, 2}), gt::random_tensor(rng, {3, 3, 2, 2}),
                           gt::random_tensor(rng, {2})};
    Tensor proj = gt::random_tensor(rng, {4, 3, 2}, -1, 1, false);
    EXPECT_LT(gt::gradcheck([&](const auto& v) { return gt::project(ops::conv2d_causal(v[0], v[1], v[2]), proj); }, in),
              1e-4);
  }
}

TEST(GradCheck, ElementwiseAndShapeOps) {
  Rng rng(12);
  std::vector<Tensor> in{gt::random_tensor(rng, {3, 4}), gt::random_tensor(rng, {3, 4}),
                         gt::random_tensor(rng, {3, 4}, 0.05, 0.95), gt::random_tensor(rng, {4})};
  Tensor proj = gt::random_tensor(rng, {4, 3}, -1, 1, false);
  auto f = [&](const std::vector<Tensor>& v) {
    Tensor a = ops::sigmoid(v[0]);
    Tensor b = ops::tanh(ops::hadamard(v[1], v[0]));
    Tensor c = ops::prelu(ops::add(ops::affine_combination(v[2], a, b), v[1]), v[3]);
    return gt::project(ops::transpose2d(c), proj);
  };
  EXPECT_LT(gt::gradcheck(f, in), 1e-4);
}

TEST(GradCheck, MaxpoolAndDense) {
  Rng rng(13);
  std::vector<Tensor> in{gt::random_tensor(rng, {7, 3}), gt::random_tensor(rng, {12, 5}),
                         gt::random_tensor(rng, {5})};
  Tensor proj = gt::random_tensor(rng, {5}, -1, 1, false);
  auto f = [&](const std::vector<Tensor>& v) {
    Tensor pooled = ops::maxpool_freq2(v[0]);
    return gt::project(ops::dense(ops::reshape(pooled, {12}), v[1], v[2]), proj);
  };
  EXPECT_LT(gt::gradcheck(f, in), 1e-4);
}
