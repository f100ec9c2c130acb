#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "symmetry.hpp"

namespace trim_mpc {

/// Time derivative of the state.
struct StateRate
{
  double dx1{0.0};
  double dx2{0.0};
  double dx3{0.0};
};

inline StateRate vector_field(const State & x, const ControlValue & u)
{
  return {u.u1 * std::cos(x.x3), u.u1 * std::sin(x.x3), u.u2};
}

/// Closed-form flow under a constant control.
inline State flow_const(const State & x0, const ControlValue & u, double t)
{
  const double eps = u.u2 * t;
  const double c = std::cos(x0.x3), s = std::sin(x0.x3);
  // sin(eps) / u2 and (1 - cos(eps)) / u2
  double sin_over_w, omc_over_w;
  if (std::abs(u.u2) < kSmallRate) {
    const double e2 = eps * eps;
    sin_over_w = t * (1.0 - e2 / 6.0);
    omc_over_w = 0.5 * t * eps * (1.0 - e2 / 12.0);
  } else {
    const double sh = std::sin(0.5 * eps);
    sin_over_w = std::sin(eps) / u.u2;
    omc_over_w = 2.0 * sh * sh / u.u2;
  }
  return {
    x0.x1 + u.u1 * (c * sin_over_w - s * omc_over_w),
    x0.x2 + u.u1 * (s * sin_over_w + c * omc_over_w),
    x0.x3 + eps,
  };
}

struct ControlSegment
{
  ControlValue u;
  double duration{0.0};
};

/// Piecewise-constant control on consecutive intervals starting at t = 0.
struct PiecewiseControl
{
  std::vector<ControlSegment> segments;

  double total_duration() const
  {
    double t = 0.0;
    for (const auto & s : segments) { t += s.duration; }
    return t;
  }

  /// Control active at time t (right-continuous; last value past the end).
  ControlValue at(double t) const
  {
    double start = 0.0;
    for (const auto & s : segments) {
      if (t < start + s.duration) { return s.u; }
      start += s.duration;
    }
    return segments.empty() ? ControlValue{} : segments.back().u;
  }
};

/// State at time t (clamped to the control's duration) via closed-form flows.
inline State flow_piecewise(const State & x0, const PiecewiseControl & pc, double t)
{
  State x   = x0;
  double tt = t;
  for (const auto & s : pc.segments) {
    if (tt <= 0.0) { break; }
    const double d = std::min(tt, s.duration);
    x              = flow_const(x, s.u, d);
    tt -= d;
  }
  return x;
}

struct TimedState
{
  double t{0.0};
  State x;
};

/**
 * @brief Classical RK4 integration of a piecewise-constant control.
 *
 * Each segment is split into ceil(duration / step) equal sub-steps. The output
 * contains the initial state, every sub-step, every switching instant and the
 * endpoint. Used as an independent check of the closed-form flows.
 */
inline std::vector<TimedState> integrate(const State & x0, const PiecewiseControl & pc, double step)
{
  if (!(step > 0.0) || !std::isfinite(step)) { throw std::invalid_argument("integrate: step must be positive"); }
  if (!is_finite(x0)) { throw std::invalid_argument("integrate: non-finite initial state"); }
  for (const auto & s : pc.segments) {
    if (!std::isfinite(s.u.u1) || !std::isfinite(s.u.u2) || !std::isfinite(s.duration) || s.duration < 0.0) {
      throw std::invalid_argument("integrate: invalid control segment");
    }
  }

  const auto f = [](const State & x, const ControlValue & u) { return vector_field(x, u); };
  const auto axpy = [](const State & x, double h, const StateRate & k) {
    return State{x.x1 + h * k.dx1, x.x2 + h * k.dx2, x.x3 + h * k.dx3};
  };

  std::vector<TimedState> out{{0.0, x0}};
  State x  = x0;
  double t = 0.0;
  for (const auto & seg : pc.segments) {
    if (seg.duration == 0.0) { continue; }
    const auto n   = static_cast<std::size_t>(std::ceil(seg.duration / step));
    const double h = seg.duration / static_cast<double>(n);
    const double t_start = t;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k1 = f(x, seg.u);
      const auto k2 = f(axpy(x, 0.5 * h, k1), seg.u);
      const auto k3 = f(axpy(x, 0.5 * h, k2), seg.u);
      const auto k4 = f(axpy(x, h, k3), seg.u);
      x.x1 += h / 6.0 * (k1.dx1 + 2.0 * k2.dx1 + 2.0 * k3.dx1 + k4.dx1);
      x.x2 += h / 6.0 * (k1.dx2 + 2.0 * k2.dx2 + 2.0 * k3.dx2 + k4.dx2);
      x.x3 += h / 6.0 * (k1.dx3 + 2.0 * k2.dx3 + 2.0 * k3.dx3 + k4.dx3);
      t = t_start + h * static_cast<double>(i + 1);
      out.push_back({t, x});
    }
    t = t_start + seg.duration;
    out.back().t = t;
  }
  return out;
}

inline double raw_distance(const State & a, const State & b)
{
  return std::hypot(a.x1 - b.x1, a.x2 - b.x2, a.x3 - b.x3);
}

/// || phi_u(t; Psi_g(x0)) - Psi_g(phi_u(t; x0)) ||; zero iff the flow commutes with g at t.
inline double equivariance_residual(const GroupElement & g, const State & x0, const PiecewiseControl & pc, double t)
{
  return raw_distance(flow_piecewise(act(g, x0), pc, t), act(g, flow_piecewise(x0, pc, t)));
}

/// Same comparison for the naive shift x -> x + dx, which is not a symmetry of the robot.
inline double naive_shift_residual(const State & dx, const State & x0, const PiecewiseControl & pc, double t)
{
  const auto add = [&](const State & x) { return State{x.x1 + dx.x1, x.x2 + dx.x2, x.x3 + dx.x3}; };
  return raw_distance(flow_piecewise(add(x0), pc, t), add(flow_piecewise(x0, pc, t)));
}

}  // namespace trim_mpc
