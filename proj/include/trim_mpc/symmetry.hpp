#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace trim_mpc {

/// Robot configuration (x1, x2, x3): planar position and heading.
/// The heading is stored unwrapped; wrap it only when comparing states.
struct State
{
  double x1{0.0};
  double x2{0.0};
  double x3{0.0};

  bool operator==(const State &) const = default;
};

/// Representative of an angle in (-pi, pi].
inline double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(a, two_pi);
  if (r <= -std::numbers::pi) { r += two_pi; }
  return r;
}

/// Euclidean distance on R^2 x S^1, heading difference wrapped.
inline double state_distance(const State & a, const State & b)
{
  return std::hypot(a.x1 - b.x1, a.x2 - b.x2, wrap_angle(a.x3 - b.x3));
}

inline bool is_finite(const State & x)
{
  return std::isfinite(x.x1) && std::isfinite(x.x2) && std::isfinite(x.x3);
}

/// Generator xi = (v1, v2, omega) of a one-parameter subgroup.
struct AlgebraElement
{
  double v1{0.0};
  double v2{0.0};
  double omega{0.0};
};

/**
 * @brief Element of the robot symmetry group, a subgroup of SE(2) x S^1.
 *
 * Acts on states as
 *
 *   [ cos(a) -sin(a) 0 dx1 ]
 *   [ sin(a)  cos(a) 0 dx2 ]
 *   [   0       0    1 dx3 ]
 *   [   0       0    0  1  ]
 *
 * on homogeneous coordinates (x; 1). For the robot the planar rotation angle a
 * always equals the heading shift dx3, so only (dx1, dx2, dx3) are stored.
 */
class GroupElement
{
public:
  GroupElement() = default;
  GroupElement(double dx1, double dx2, double dx3) : dx1_(dx1), dx2_(dx2), dx3_(dx3) {}

  static GroupElement identity() { return {}; }
  static GroupElement translation(double dx1, double dx2) { return {dx1, dx2, 0.0}; }
  static GroupElement rotation(double angle) { return {0.0, 0.0, angle}; }

  double dtheta() const { return dx3_; }
  double dx1() const { return dx1_; }
  double dx2() const { return dx2_; }
  double dx3() const { return dx3_; }

  Eigen::Matrix4d matrix() const
  {
    const double c = std::cos(dx3_), s = std::sin(dx3_);
    Eigen::Matrix4d m;
    // clang-format off
    m << c,  -s,  0.0, dx1_,
         s,   c,  0.0, dx2_,
         0.0, 0.0, 1.0, dx3_,
         0.0, 0.0, 0.0, 1.0;
    // clang-format on
    return m;
  }

private:
  double dx1_{0.0};
  double dx2_{0.0};
  double dx3_{0.0};
};

/// Left action Psi(g, x) = E g (x; 1).
inline State act(const GroupElement & g, const State & x)
{
  const double c = std::cos(g.dtheta()), s = std::sin(g.dtheta());
  return {c * x.x1 - s * x.x2 + g.dx1(), s * x.x1 + c * x.x2 + g.dx2(), x.x3 + g.dx3()};
}

/// g o h, so that act(compose(g, h), x) == act(g, act(h, x)).
inline GroupElement compose(const GroupElement & g, const GroupElement & h)
{
  const double c = std::cos(g.dtheta()), s = std::sin(g.dtheta());
  return {
    c * h.dx1() - s * h.dx2() + g.dx1(),
    s * h.dx1() + c * h.dx2() + g.dx2(),
    g.dx3() + h.dx3(),
  };
}

inline GroupElement inverse(const GroupElement & g)
{
  const double c = std::cos(g.dtheta()), s = std::sin(g.dtheta());
  return {-(c * g.dx1() + s * g.dx2()), -(-s * g.dx1() + c * g.dx2()), -g.dx3()};
}

/// Below this |omega| the exponential uses its Taylor expansion.
inline constexpr double kSmallRate = 1e-8;

/**
 * @brief Group exponential exp(xi * t).
 *
 * Rotation by omega * t and translation
 *   b = ( (v1 sin(wt) - v2 (1 - cos(wt))) / w,
 *         (v1 (1 - cos(wt)) + v2 sin(wt)) / w,
 *         w t ).
 * 1 - cos is evaluated as 2 sin^2(wt / 2) to avoid cancellation.
 */
inline GroupElement exp(const AlgebraElement & xi, double t)
{
  const double theta = xi.omega * t;
  double sin_over_w, omc_over_w;
  if (std::abs(xi.omega) < kSmallRate) {
    const double th2 = theta * theta;
    sin_over_w = t * (1.0 - th2 / 6.0);
    omc_over_w = 0.5 * t * theta * (1.0 - th2 / 12.0);
  } else {
    const double sh = std::sin(0.5 * theta);
    sin_over_w = std::sin(theta) / xi.omega;
    omc_over_w = 2.0 * sh * sh / xi.omega;
  }
  return {
    xi.v1 * sin_over_w - xi.v2 * omc_over_w,
    xi.v1 * omc_over_w + xi.v2 * sin_over_w,
    theta,
  };
}

/// Constant control value (u1 forward speed, u2 turn rate).
struct ControlValue
{
  double u1{0.0};
  double u2{0.0};

  bool operator==(const ControlValue &) const = default;
};

/// Generator of the trim through x0 under the constant control u:
/// act(exp(xi_from(u, x0), t), x0) is the flow of the robot from x0.
inline AlgebraElement xi_from(const ControlValue & u, const State & x0)
{
  return {
    u.u1 * std::cos(x0.x3) + u.u2 * x0.x2,
    u.u1 * std::sin(x0.x3) - u.u2 * x0.x1,
    u.u2,
  };
}

}  // namespace trim_mpc
