#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "estseq/prox.hpp"
#include "fixtures.hpp"
#include "properties.hpp"

using namespace estseq;
using namespace estseq::testing;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(Prox, ZeroIsIdentity) {
  const Vec u = vec({1.0, -2.0, 3.5});
  EXPECT_TRUE((prox(Regularizer::zero(), 0.7, u).array() == u.array()).all());
}

TEST(Prox, SoftThreshold) {
  const Vec out = prox(Regularizer::l1(1.0), 0.5, vec({2.0, -0.3, 0.7, -4.0}));
  EXPECT_DOUBLE_EQ(out[0], 1.5);
  EXPECT_EQ(out[1], 0.0);
  EXPECT_DOUBLE_EQ(out[2], 0.2);
  EXPECT_DOUBLE_EQ(out[3], -3.5);
}

TEST(Prox, BallProjection) {
  const auto ball = Regularizer::l2_ball(1.0);
  const Vec out = prox(ball, 3.0, vec({3.0, 4.0}));
  EXPECT_DOUBLE_EQ(out[0], 0.6);
  EXPECT_DOUBLE_EQ(out[1], 0.8);
  const Vec inside = vec({0.3, -0.4});
  EXPECT_TRUE((prox(ball, 3.0, inside).array() == inside.array()).all());
}

TEST(Prox, InplaceMatches) {
  Vec u = vec({2.0, -0.3, 0.7});
  const Vec want = prox(Regularizer::l1(0.4), 0.9, u);
  prox_inplace(Regularizer::l1(0.4), 0.9, u);
  EXPECT_TRUE((u.array() == want.array()).all());
}

TEST(Prox, Values) {
  const Vec x = vec({1.0, -2.0});
  EXPECT_EQ(reg_value(Regularizer::zero(), x), 0.0);
  EXPECT_DOUBLE_EQ(reg_value(Regularizer::l1(0.5), x), 1.5);
  EXPECT_EQ(reg_value(Regularizer::l2_ball(3.0), x), 0.0);
  EXPECT_EQ(reg_value(Regularizer::l2_ball(1.0), x), std::numeric_limits<double>::infinity());
}

TEST(Prox, Parse) {
  EXPECT_TRUE(Regularizer::parse("none").is_zero());
  const auto l1 = Regularizer::parse("l1:0.25");
  EXPECT_EQ(l1.kind(), Regularizer::Kind::l1);
  EXPECT_EQ(l1.param(), 0.25);
  const auto ball = Regularizer::parse("ball:2");
  EXPECT_TRUE(ball.is_indicator());
  EXPECT_EQ(ball.param(), 2.0);
  EXPECT_THROW(Regularizer::parse("l1:"), std::invalid_argument);
  EXPECT_THROW(Regularizer::parse("ball:-1"), std::invalid_argument);
  EXPECT_THROW(Regularizer::parse("tv:1"), std::invalid_argument);
}

TEST(Prox, SubgradientFromProx) {
  const auto reg = Regularizer::l1(1.0);
  const Vec u = vec({0.5, 0.1, -0.4});
  const Vec g = vec({-1.0, 0.2, 0.3});
  const double eta = 0.5;
  const Vec x = prox(reg, eta, u - eta * g);
  const Vec s = psi_subgradient_from_prox(u, x, eta, g);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) EXPECT_NEAR(s[j], std::copysign(1.0, x[j]), 1e-14);
    else EXPECT_LE(std::abs(s[j]), 1.0 + 1e-14);
  }
}

TEST(Properties, ProxNonexpansive) {
  const auto r = prox_nonexpansive_property(11);
  EXPECT_TRUE(r.ok) << r.failure;
  EXPECT_GE(r.checks, 3000u);
}

TEST(Properties, ProxOptimality) {
  const auto r = prox_optimality_property(12);
  EXPECT_TRUE(r.ok) << r.failure;
}

TEST(Properties, ProxStructure) {
  const auto r = prox_structure_property(13);
  EXPECT_TRUE(r.ok) << r.failure;
}
