#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <trim_mpc/robot_model.hpp>

using namespace trim_mpc;

namespace {

constexpr double pi = std::numbers::pi;

void expect_state(const State & a, const State & b, double tol)
{
  EXPECT_NEAR(a.x1, b.x1, tol);
  EXPECT_NEAR(a.x2, b.x2, tol);
  EXPECT_NEAR(a.x3, b.x3, tol);
}

}  // namespace

TEST(VectorField, Examples)
{
  const auto a = vector_field({0, 0, 0}, {1, 0});
  EXPECT_DOUBLE_EQ(a.dx1, 1.0);
  EXPECT_DOUBLE_EQ(a.dx2, 0.0);
  const auto b = vector_field({0, 0, pi / 2}, {1, 0});
  EXPECT_NEAR(b.dx1, 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(b.dx2, 1.0);
  const auto c = vector_field({5, -3, 0}, {0, 2});
  EXPECT_DOUBLE_EQ(c.dx1, 0.0);
  EXPECT_DOUBLE_EQ(c.dx2, 0.0);
  EXPECT_DOUBLE_EQ(c.dx3, 2.0);
}

TEST(FlowConst, StraightLineToOrigin) { expect_state(flow_const({-2, 0, 0}, {2, 0}, 1), {0, 0, 0}, 1e-15); }

TEST(FlowConst, HalfCircleFromParkingStart) { expect_state(flow_const({0, 1, 0}, {-0.25, 1}, pi), {0, 0.5, pi}, 1e-14); }

TEST(FlowConst, RestKeepsState)
{
  const State x{1.3, -0.2, 4.0};
  expect_state(flow_const(x, {0, 0}, 17.0), x, 0.0);
}

TEST(FlowConst, AgreesWithGroupExponential)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int i = 0; i < 200; ++i) {
    const State x{d(rng), d(rng), d(rng)};
    const ControlValue u{d(rng), d(rng)};
    const double t = std::abs(d(rng)) * 3;
    expect_state(flow_const(x, u, t), act(exp(xi_from(u, x), t), x), 1e-12);
  }
}

TEST(FlowPiecewise, SingleSegment)
{
  PiecewiseControl pc{{{{2, 0}, 1}}};
  EXPECT_LT(raw_distance(flow_piecewise({-2, 0, 0}, pc, 1), {0, 0, 0}), 1e-10);
}

TEST(FlowPiecewise, FullCircleReturnsWithHeadingShift)
{
  PiecewiseControl pc{{{{-0.25, -1}, 2 * pi}}};
  const State x0{0.4, -1.1, 0.3};
  expect_state(flow_piecewise(x0, pc, 2 * pi), {x0.x1, x0.x2, x0.x3 - 2 * pi}, 1e-8);
}

TEST(FlowPiecewise, EvaluatesInsideSegments)
{
  PiecewiseControl pc{{{{1, 0}, 1}, {{0, 1}, 2}}};
  expect_state(flow_piecewise({0, 0, 0}, pc, 2), {1, 0, 1}, 1e-14);
}

TEST(Integrate, AgreesWithClosedForm)
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int i = 0; i < 20; ++i) {
    PiecewiseControl pc;
    for (int k = 0; k < 3; ++k) { pc.segments.push_back({{d(rng), d(rng)}, std::abs(d(rng))}); }
    const State x0{d(rng), d(rng), d(rng)};
    const auto traj = integrate(x0, pc, 1e-3);
    EXPECT_LT(raw_distance(traj.back().x, flow_piecewise(x0, pc, pc.total_duration())), 1e-8);
    EXPECT_NEAR(traj.back().t, pc.total_duration(), 1e-12);
  }
}

TEST(Equivariance, IdentityGivesZero)
{
  PiecewiseControl pc{{{{1, 0.5}, 2}}};
  EXPECT_EQ(equivariance_residual(GroupElement::identity(), {1, 2, 3}, pc, 1.5), 0.0);
}

TEST(Equivariance, RandomSamples)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int i = 0; i < 500; ++i) {
    const GroupElement g(d(rng), d(rng), d(rng));
    PiecewiseControl pc{{{{d(rng) / 2, d(rng) / 2}, std::abs(d(rng))}, {{d(rng) / 2, d(rng) / 2}, std::abs(d(rng))}}};
    EXPECT_LE(equivariance_residual(g, {d(rng), d(rng), d(rng)}, pc, pc.total_duration()), 1e-10);
  }
}

TEST(Equivariance, NaiveShiftIsWrongWhenTurning)
{
  PiecewiseControl turning{{{{1, 0.5}, 2}}};
  PiecewiseControl straight{{{{1, 0}, 2}}};
  EXPECT_GT(naive_shift_residual({0, 0, 1}, {0, 0, 0}, turning, 2), 1e-3);
  EXPECT_GT(naive_shift_residual({0, 0, 1}, {0, 0, 0}, straight, 2), 1e-3);
  EXPECT_LT(naive_shift_residual({1, 1, 0}, {0, 0, 0}, straight, 2), 1e-14);
}

TEST(PiecewiseControl, ValueAtTime)
{
  PiecewiseControl pc{{{{1, 0}, 1}, {{0, 1}, 2}}};
  EXPECT_EQ(pc.at(0.5).u1, 1.0);
  EXPECT_EQ(pc.at(1.5).u2, 1.0);
  EXPECT_DOUBLE_EQ(pc.total_duration(), 3.0);
}
