#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <trim_mpc/symmetry.hpp>

using namespace trim_mpc;

namespace {

constexpr double pi = std::numbers::pi;

void expect_state(const State & a, const State & b, double tol = 1e-12)
{
  EXPECT_NEAR(a.x1, b.x1, tol);
  EXPECT_NEAR(a.x2, b.x2, tol);
  EXPECT_NEAR(a.x3, b.x3, tol);
}

void expect_group(const GroupElement & a, const GroupElement & b, double tol = 1e-12)
{
  EXPECT_NEAR(a.dx1(), b.dx1(), tol);
  EXPECT_NEAR(a.dx2(), b.dx2(), tol);
  EXPECT_NEAR(a.dx3(), b.dx3(), tol);
}

}  // namespace

TEST(Action, IdentityLeavesStateUnchanged) { expect_state(act(GroupElement::identity(), {1, 2, 3}), {1, 2, 3}); }

TEST(Action, TranslationShiftsParkingStart)
{
  expect_state(act(GroupElement(1, 1, 0), {-1, 0, 0}), {0, 1, 0});
}

TEST(Action, HalfTurnAboutOrigin) { expect_state(act(GroupElement(0, 1.5, pi), {0, 1, 0}), {0, 0.5, pi}); }

TEST(Action, MatchesHomogeneousMatrix)
{
  const GroupElement g(0.3, -1.2, 2.1);
  const State x{0.7, 1.9, -0.4};
  const Eigen::Vector4d h = g.matrix() * Eigen::Vector4d(x.x1, x.x2, x.x3, 1.0);
  expect_state(act(g, x), {h(0), h(1), h(2)}, 1e-14);
}

TEST(Compose, NeutralElement)
{
  const GroupElement h(0.2, 0.4, 1.0);
  expect_group(compose(GroupElement::identity(), h), h);
}

TEST(Compose, InverseGivesIdentity)
{
  const GroupElement g(-3.0, 2.0, 0.7);
  expect_group(compose(g, inverse(g)), GroupElement::identity(), 1e-14);
}

TEST(Compose, TranslationsAdd)
{
  expect_group(compose(GroupElement::translation(1, 0), GroupElement::translation(0, 2)), {1, 2, 0});
}

TEST(Compose, MatchesMatrixProduct)
{
  const GroupElement g(0.5, 1.0, 0.3), h(-2.0, 0.1, -1.4);
  const Eigen::Matrix4d m = g.matrix() * h.matrix();
  EXPECT_LT((compose(g, h).matrix() - m).norm(), 1e-13);
}

TEST(Inverse, Identity) { expect_group(inverse(GroupElement::identity()), GroupElement::identity()); }

TEST(Inverse, Rotation) { expect_group(inverse(GroupElement::rotation(0.8)), GroupElement::rotation(-0.8)); }

TEST(Inverse, OneParameterSubgroup)
{
  const AlgebraElement xi{0.4, -0.3, 1.3};
  expect_group(inverse(exp(xi, 2.2)), exp(xi, -2.2), 1e-12);
}

TEST(Exp, PureRotation)
{
  const auto g = exp({0, 0, 1}, pi);
  expect_group(g, {0, 0, pi}, 1e-15);
}

TEST(Exp, PureTranslation) { expect_group(exp({1.5, 0, 0}, 2), {3, 0, 0}); }

TEST(Exp, TrimFourAnchoredAtParkingStart) { expect_group(exp({0.75, 0, 1}, pi), {0, 1.5, pi}, 1e-14); }

TEST(Exp, SmallRateBranchMatchesClosedForm)
{
  for (double w : {0.999e-8, 1.001e-8, 1e-12}) {
    const AlgebraElement xi{1.0, 0.5, w};
    const double t       = 3.0;
    const long double th = static_cast<long double>(w) * t;
    const long double so = std::sin(th) / w;
    const long double oc = 2.0L * std::sin(th / 2) * std::sin(th / 2) / w;
    const auto g         = exp(xi, t);
    EXPECT_NEAR(g.dx1(), static_cast<double>(xi.v1 * so - xi.v2 * oc), 1e-14);
    EXPECT_NEAR(g.dx2(), static_cast<double>(xi.v1 * oc + xi.v2 * so), 1e-14);
  }
}

TEST(XiFrom, TurnOnTheSpot)
{
  const auto xi = xi_from({0, 1}, {0, 0, 0});
  EXPECT_DOUBLE_EQ(xi.v1, 0.0);
  EXPECT_DOUBLE_EQ(xi.v2, 0.0);
  EXPECT_DOUBLE_EQ(xi.omega, 1.0);
}

TEST(XiFrom, StraightFromParkingStart)
{
  const auto xi = xi_from({1.5, 0}, {0, 1, 0});
  EXPECT_NEAR(xi.v1, 1.5, 1e-15);
  EXPECT_NEAR(xi.v2, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(xi.omega, 0.0);
}

TEST(XiFrom, CircleFromParkingStart)
{
  const auto xi = xi_from({-0.25, 1}, {0, 1, 0});
  EXPECT_NEAR(xi.v1, 0.75, 1e-15);
  EXPECT_NEAR(xi.v2, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(xi.omega, 1.0);
}

TEST(WrapAngle, IntoHalfOpenInterval)
{
  EXPECT_NEAR(wrap_angle(3 * pi), pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.5), -0.5, 1e-15);
  EXPECT_NEAR(state_distance({0, 0, 2 * pi}, {0, 0, 0}), 0.0, 1e-12);
}
