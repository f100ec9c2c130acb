#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <trim_mpc/costs.hpp>
#include <trim_mpc/problem.hpp>

using namespace trim_mpc;

TEST(StageCost, SquaredNormOfStraightLine)
{
  StageCost c;
  EXPECT_DOUBLE_EQ(rate(c, {2, 0}), 4.0);
  EXPECT_DOUBLE_EQ(rate(c, {0, 0}), 0.0);
}

TEST(StageCost, CollocationIntegrand)
{
  StageCost c;
  c.R << 4, -1.5, -1.5, 1;
  c.c2 = 0.1;
  EXPECT_NEAR(rate(c, {1, 1}), 2.0 + 0.1 * std::sqrt(2.0), 1e-15);
}

TEST(StageCost, TrimFourWithNormPenalty)
{
  StageCost c;
  c.c2 = 0.5;
  EXPECT_NEAR(rate(c, {-0.25, 1}), 1.0625 + 0.5 * std::sqrt(1.0625), 1e-15);
}

TEST(StageCost, NormKinds)
{
  EXPECT_DOUBLE_EQ(norm({3, -4}, NormKind::L1), 7.0);
  EXPECT_DOUBLE_EQ(norm({3, -4}, NormKind::L2), 5.0);
  EXPECT_DOUBLE_EQ(norm({3, -4}, NormKind::Linf), 4.0);
  EXPECT_EQ(norm_kind_from_string("Linf"), NormKind::Linf);
  EXPECT_THROW(norm_kind_from_string("L3"), std::invalid_argument);
}

TEST(StageCost, Validation)
{
  StageCost c;
  c.c1 = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.c1 = 1;
  c.R << 1, 2, 2, 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.R << 1, 0.5, 0.4, 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Invariance, StageCostIsInvariant)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-4, 4);
  std::vector<InvarianceSample> samples;
  for (int i = 0; i < 100; ++i) {
    samples.push_back({GroupElement(d(rng), d(rng), d(rng)), {d(rng), d(rng), d(rng)}, {d(rng), d(rng)}});
  }
  StageCost c;
  c.c2 = 0.3;
  c.c3 = 1.0;
  EXPECT_EQ(check_invariance(as_function(c), samples), 0.0);

  TrackingCost tracking;
  EXPECT_GT(check_invariance(tracking, samples), 0.0);
  tracking.Q.setZero();
  EXPECT_EQ(check_invariance(tracking, samples), 0.0);
}

TEST(ShiftProblem, IdentityKeepsProblem)
{
  ProblemSpec p;
  p.x_hat        = {-1, 0, 0};
  const auto out = shift_problem(GroupElement::identity(), p);
  EXPECT_EQ(out.problem.x_hat, p.x_hat);
  EXPECT_EQ(out.problem.x_star, p.x_star);
  EXPECT_FALSE(out.warning);
}

TEST(ShiftProblem, ParkingShift)
{
  ProblemSpec p;
  p.x_hat        = {-1, 0, 0};
  const auto out = shift_problem(GroupElement(1, 1, 0), p);
  EXPECT_EQ(out.problem.x_hat, (State{0, 1, 0}));
  EXPECT_EQ(out.problem.x_star, (State{1, 1, 0}));
}

TEST(ShiftProblem, ObliqueRotationDropsBox)
{
  ProblemSpec p;
  p.state_box    = StateBox{{-5, -5, -10}, {5, 5, 10}};
  const auto out = shift_problem(GroupElement(0, 0, 0.3), p);
  EXPECT_FALSE(out.problem.state_box);
  EXPECT_TRUE(out.warning);
  const auto kept = shift_problem(GroupElement(1, 0, 0), p);
  ASSERT_TRUE(kept.problem.state_box);
  EXPECT_NEAR(kept.problem.state_box->lower.x1, -4, 1e-12);
}
