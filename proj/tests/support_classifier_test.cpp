#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "grad_cases.hpp"
#include "mick/error.hpp"
#include "mick/grad_check.hpp"
#include "mick/matching.hpp"
#include "mick/support_classifier.hpp"
#include "oracles.hpp"

namespace mick {
namespace {

using testing::random_tensor;

ClassifierParams random_classifier(std::size_t way, std::size_t dim, std::mt19937_64& rng) {
  ClassifierParams p = ClassifierParams::zeros(way, dim);
  p.weight.value = random_tensor({way, dim}, rng);
  p.bias.value = random_tensor({way}, rng);
  return p;
}

TEST(Classifier, ZeroInitIsUniform) {
  std::mt19937_64 rng(1);
  for (std::size_t n = 1; n <= 6; ++n) {
    const ClassifierParams p = ClassifierParams::zeros(n, 4);
    Graph g;
    const ClassifierNodes c = ClassifierNodes::bind(g, p);
    const Tensor& o = g.value(classify_support(g, c, g.leaf(random_tensor({4}, rng))));
    for (double v : o.values()) EXPECT_EQ(v, 1.0 / double(n));
  }
}

TEST(Classifier, DominantBiasWins) {
  for (std::size_t n = 2; n <= 5; ++n) {
    ClassifierParams p = ClassifierParams::zeros(n, 3);
    p.bias.value[0] = 10.0;
    Graph g;
    const ClassifierNodes c = ClassifierNodes::bind(g, p);
    const Tensor& o = g.value(classify_support(g, c, g.leaf(Tensor::vector({0.3, -0.2, 0.9}))));
    EXPECT_GT(o[0], 0.999);
  }
}

TEST(Classifier, MatchesDirectFormula) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const ClassifierParams p = random_classifier(5, 6, rng);
    const Tensor e = random_tensor({6}, rng);
    Graph g;
    const Tensor& o = g.value(classify_support(g, ClassifierNodes::bind(g, p), g.leaf(e)));
    std::vector<double> logits(5);
    for (std::size_t i = 0; i < 5; ++i) {
      logits[i] = p.bias.value[i];
      for (std::size_t d = 0; d < 6; ++d) logits[i] += p.weight.value.at(i, d) * e[d];
    }
    const auto expected = testing::direct_softmax(logits);
    double total = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(o[i], expected[i], 1e-12);
      total += o[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(SupportLoss, ZeroClassifierGivesLogN) {
  std::mt19937_64 rng(3);
  for (std::size_t n = 1; n <= 5; ++n) {
    Graph g;
    const ClassifierNodes c = ClassifierNodes::bind(g, ClassifierParams::zeros(n, 4));
    std::vector<std::vector<NodeId>> support(n);
    for (auto& slot : support) {
      for (int k = 0; k < 3; ++k) slot.push_back(g.leaf(random_tensor({4}, rng)));
    }
    EXPECT_NEAR(g.value(support_loss(g, c, support)).item(), std::log(double(n)), 1e-12);
  }
}

TEST(SupportLoss, ConfidentCorrectClassifierIsAlmostFree) {
  ClassifierParams p = ClassifierParams::zeros(3, 3);
  for (std::size_t i = 0; i < 3; ++i) p.weight.value.at(i, i) = 50.0;
  Graph g;
  const ClassifierNodes c = ClassifierNodes::bind(g, p);
  std::vector<std::vector<NodeId>> support(3);
  for (std::size_t i = 0; i < 3; ++i) {
    Tensor v({3});
    v[i] = 1.0;
    support[i] = {g.leaf(v), g.leaf(v)};
  }
  const double loss = g.value(support_loss(g, c, support)).item();
  EXPECT_LE(loss, 1e-8);
  EXPECT_GE(loss, 0.0);
}

TEST(SupportLoss, WayMismatchIsRejected) {
  Graph g;
  const ClassifierNodes c = ClassifierNodes::bind(g, ClassifierParams::zeros(3, 2));
  const std::vector<std::vector<NodeId>> support{{g.leaf(Tensor({2}))}, {g.leaf(Tensor({2}))}};
  EXPECT_THROW(support_loss(g, c, support), ValidationError);
}

TEST(SupportLoss, GradientAtTenPoints) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto c = testing::support_loss_grad_case(900 + seed);
    EXPECT_LT(grad_check(c.f, c.params).max_relative_error, 1e-4) << "seed " << seed;
  }
}

TEST(SupportLoss, BiasGradientIsMeanResidual) {
  std::mt19937_64 rng(4);
  const ClassifierParams p = random_classifier(3, 4, rng);
  Graph g;
  const ClassifierNodes c = ClassifierNodes::bind(g, p);
  std::vector<std::vector<NodeId>> support(3);
  std::vector<Tensor> outputs;
  std::vector<std::size_t> slots;
  for (std::size_t s = 0; s < 3; ++s) {
    for (int k = 0; k < 2; ++k) {
      const NodeId e = g.leaf(random_tensor({4}, rng));
      support[s].push_back(e);
      outputs.push_back(g.value(classify_support(g, c, e)));
      slots.push_back(s);
    }
  }
  const Gradients grads = g.backward(support_loss(g, c, support));
  Tensor expected({3});
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      expected[j] += (outputs[i][j] - (j == slots[i] ? 1.0 : 0.0)) / double(outputs.size());
    }
  }
  EXPECT_LE(max_abs_diff(grads.get(c.bias), expected), 1e-12);
}

TEST(Classifier, ConstantBiasShiftKeepsArgmax) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    ClassifierParams p = random_classifier(4, 3, rng);
    const Tensor e = random_tensor({3}, rng);
    Graph g;
    const Tensor a = g.value(classify_support(g, ClassifierNodes::bind(g, p), g.leaf(e)));
    for (double& b : p.bias.value.values()) b += 3.5;
    const Tensor b = g.value(classify_support(g, ClassifierNodes::bind(g, p), g.leaf(e)));
    EXPECT_EQ(argmax(a.values()), argmax(b.values()));
  }
}

TEST(Classifier, CollectUsesParameterNames) {
  const ClassifierParams p = ClassifierParams::zeros(2, 3);
  Graph g;
  const ClassifierNodes c = ClassifierNodes::bind(g, p);
  const std::vector<std::vector<NodeId>> support{{g.leaf(Tensor({3}, 1.0))},
                                                 {g.leaf(Tensor({3}, -1.0))}};
  GradientMap out;
  c.collect(g.backward(support_loss(g, c, support)), out, p);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.at("classifier_weight").shape(), (Shape{2, 3}));
  EXPECT_EQ(out.at("classifier_bias").shape(), (Shape{2}));
}

}  // namespace
}  // namespace mick
