#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "costs.hpp"
#include "mpc.hpp"
#include "robot_model.hpp"
#include "symmetry.hpp"

namespace trim_mpc {

// ---------------------------------------------------------------------------
// Uniform control effort

struct ImprovementResult
{
  PiecewiseControl improved;
  double old_cost{0.0};
  double new_cost{0.0};
  double alpha{1.0};  ///< scaling of the segment with the larger R-norm
  double beta{1.0};   ///< scaling of the other segment
  double endpoint_residual{0.0};
};

inline double segment_cost(const ControlSegment & s, const StageCost & cost) { return s.duration * rate(cost, s.u); }

inline double control_cost(const PiecewiseControl & pc, const StageCost & cost)
{
  double j = 0.0;
  for (const auto & s : pc.segments) { j += segment_cost(s, cost); }
  return j;
}

namespace detail {

inline ControlSegment scaled(const ControlSegment & s, double factor)
{
  return {{factor * s.u.u1, factor * s.u.u2}, s.duration / factor};
}

}  // namespace detail

/**
 * @brief The redistribution from the uniform-effort argument for a fixed alpha.
 *
 * The segment with the larger R-norm is slowed down by alpha (control alpha u,
 * duration t / alpha) and the other sped up by
 * beta = alpha t_s / (alpha t_s - (1 - alpha) t_l), which keeps the total
 * duration. Both segments trace the same paths as before, so the endpoint is
 * unchanged. Throws std::invalid_argument when alpha is outside (0, 1] or the
 * denominator of beta is not positive. The endpoint residual is measured
 * from `x0`.
 */
inline ImprovementResult redistribute(const ControlSegment & seg1, const ControlSegment & seg2, const StageCost & cost,
                                      double alpha, const State & x0 = {})
{
  if (!(seg1.duration > 0.0 && seg2.duration > 0.0)) { throw std::invalid_argument("segment durations must be positive"); }
  if (!(alpha > 0.0 && alpha <= 1.0)) { throw std::invalid_argument("alpha must lie in (0, 1]"); }
  const bool first_larger    = r_norm(seg1.u, cost.R) >= r_norm(seg2.u, cost.R);
  const ControlSegment & lg  = first_larger ? seg1 : seg2;
  const ControlSegment & sm  = first_larger ? seg2 : seg1;
  const double denominator   = alpha * sm.duration - (1.0 - alpha) * lg.duration;
  if (!(denominator > 0.0)) { throw std::invalid_argument("alpha too small: t_s - (1 - alpha) t_l must stay positive"); }

  ImprovementResult out;
  out.alpha                 = alpha;
  out.beta                  = alpha * sm.duration / denominator;
  const ControlSegment lg_n = detail::scaled(lg, alpha);
  const ControlSegment sm_n = detail::scaled(sm, out.beta);
  out.improved.segments     = first_larger ? std::vector{lg_n, sm_n} : std::vector{sm_n, lg_n};

  PiecewiseControl old;
  old.segments = {seg1, seg2};
  out.old_cost = control_cost(old, cost);
  out.new_cost = control_cost(out.improved, cost);
  const State a = flow_piecewise(x0, old, old.total_duration());
  const State b = flow_piecewise(x0, out.improved, out.improved.total_duration());
  out.endpoint_residual = raw_distance(a, b);
  return out;
}

/**
 * Strict improvement of a two-segment control with unequal R-norms; nullopt
 * when the norms agree to 1e-9 or no alpha = 1 - 2^-k gives a smaller cost.
 */
inline std::optional<ImprovementResult> improve_nonuniform(const ControlSegment & seg1, const ControlSegment & seg2,
                                                           const StageCost & cost, const State & x0 = {})
{
  if (!(seg1.duration > 0.0 && seg2.duration > 0.0)) { throw std::invalid_argument("segment durations must be positive"); }
  if (std::abs(r_norm(seg1.u, cost.R) - r_norm(seg2.u, cost.R)) <= 1e-9) { return std::nullopt; }
  for (int k = 1; k <= 52; ++k) {
    const double alpha = 1.0 - std::ldexp(1.0, -k);
    const bool lg1     = r_norm(seg1.u, cost.R) >= r_norm(seg2.u, cost.R);
    const double ts    = lg1 ? seg2.duration : seg1.duration;
    const double tl    = lg1 ? seg1.duration : seg2.duration;
    if (!(alpha * ts - (1.0 - alpha) * tl > 0.0)) { continue; }
    auto r = redistribute(seg1, seg2, cost, alpha, x0);
    if (r.new_cost < r.old_cost) { return r; }
  }
  return std::nullopt;
}

/// max - min of ||u||_R over the segments with positive duration.
inline double check_uniform_effort(const PiecewiseControl & pc, const Eigen::Matrix2d & R)
{
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto & s : pc.segments) {
    if (!(s.duration > 0.0)) { continue; }
    const double n = r_norm(s.u, R);
    lo             = std::min(lo, n);
    hi             = std::max(hi, n);
  }
  return hi >= lo ? hi - lo : 0.0;
}

// ---------------------------------------------------------------------------
// Simplified dynamics: x1' = u1 cos u3, x2' = u1 sin u3, x3' = u2, cost int u1^2 + u2^2

inline double simplified_value(const State & x_hat, double T)
{
  if (!(T > 0.0)) { throw std::invalid_argument("T must be positive"); }
  const double h = wrap_angle(x_hat.x3);
  return (x_hat.x1 * x_hat.x1 + x_hat.x2 * x_hat.x2 + h * h) / T;
}

struct SimplifiedSegment
{
  double u1{0.0};
  double u2{0.0};
  double u3{0.0};
  double duration{0.0};
};

/// Endpoint of the simplified dynamics, heading started from its wrapped value.
inline State simplified_endpoint(const State & x_hat, const std::vector<SimplifiedSegment> & segs)
{
  State x{x_hat.x1, x_hat.x2, wrap_angle(x_hat.x3)};
  for (const auto & s : segs) {
    x.x1 += s.u1 * std::cos(s.u3) * s.duration;
    x.x2 += s.u1 * std::sin(s.u3) * s.duration;
    x.x3 += s.u2 * s.duration;
  }
  return x;
}

inline double simplified_cost(const std::vector<SimplifiedSegment> & segs)
{
  double j = 0.0;
  for (const auto & s : segs) { j += (s.u1 * s.u1 + s.u2 * s.u2) * s.duration; }
  return j;
}

/// Constant control steering straight to the origin: u1 = |p| / T along -p, u2 = -x3 / T.
inline std::vector<SimplifiedSegment> simplified_constant_candidate(const State & x_hat, double T)
{
  const double dist = std::hypot(x_hat.x1, x_hat.x2);
  const double dir  = dist > 0.0 ? std::atan2(-x_hat.x2, -x_hat.x1) : 0.0;
  return {{dist / T, -wrap_angle(x_hat.x3) / T, dir, T}};
}

namespace detail {

/**
 * Nested grid search for min sum_j |d_j|^2 / tau over n equal-duration pieces
 * of dimension `dim` with sum_j d_j = target. The first n - 1 pieces range over
 * a grid of `grid` points per coordinate; the last piece closes the gap. Each
 * level shrinks the search box around the incumbent by a factor of four.
 */
inline double nested_split_search(const std::vector<double> & target, int n, double tau, int grid, int levels)
{
  const std::size_t dim   = target.size();
  const std::size_t nfree = static_cast<std::size_t>(n - 1) * dim;
  double scale            = 0.0;
  for (double v : target) { scale = std::max(scale, std::abs(v)); }
  const auto cost_of = [&](const std::vector<double> & d) {
    std::vector<double> last(target);
    double j = 0.0;
    for (int s = 0; s + 1 < n; ++s) {
      double sq = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double v = d[static_cast<std::size_t>(s) * dim + c];
        sq += v * v;
        last[c] -= v;
      }
      j += sq / tau;
    }
    double sq = 0.0;
    for (double v : last) { sq += v * v; }
    return j + sq / tau;
  };

  std::vector<double> center(nfree, 0.0);
  double best = cost_of(center);
  if (nfree == 0 || scale == 0.0) { return best; }
  double half = 1.5 * scale;
  for (int level = 0; level < levels; ++level) {
    std::vector<int> digit(nfree, 0);
    std::vector<double> trial(nfree), best_point = center;
    while (true) {
      for (std::size_t i = 0; i < nfree; ++i) {
        trial[i] = center[i] + half * (grid == 1 ? 0.0 : -1.0 + 2.0 * digit[i] / (grid - 1));
      }
      const double j = cost_of(trial);
      if (j < best) {
        best       = j;
        best_point = trial;
      }
      std::size_t pos = 0;
      while (pos < nfree && ++digit[pos] == grid) { digit[pos++] = 0; }
      if (pos == nfree) { break; }
    }
    center = best_point;
    half *= 0.25;
  }
  return best;
}

}  // namespace detail

/**
 * @brief Brute-force upper bound for the simplified OCP with `segments` equal pieces.
 *
 * The problem splits into the planar part (u1, u3), whose pieces contribute
 * displacements d_j with cost |d_j|^2 / tau, and the heading part u2, which
 * is a 1-D sum of increments. Both are searched on nested grids of `grid`
 * points per coordinate; the result converges to the value from above as the
 * grid and the number of levels grow.
 */
inline double simplified_bruteforce(const State & x_hat, double T, int segments, int grid, int levels = 12)
{
  if (!(T > 0.0)) { throw std::invalid_argument("T must be positive"); }
  if (segments < 1 || segments > 4) { throw std::invalid_argument("segments must be in [1, 4]"); }
  if (grid < 2) { throw std::invalid_argument("grid needs at least two points"); }
  const double tau    = T / segments;
  const double planar = detail::nested_split_search({-x_hat.x1, -x_hat.x2}, segments, tau, grid, levels);
  const double turn   = detail::nested_split_search({-wrap_angle(x_hat.x3)}, segments, tau, grid, levels);
  return planar + turn;
}

// ---------------------------------------------------------------------------
// Lyapunov decrease along an MPC trace

/**
 * Per-record margin [V(x_i) - V(x_{i+1})] - lambda_min(R) c1 delta |x_i - x*|^2 / T^2,
 * with the heading difference wrapped. The final record (no successor) gets 0.
 */
inline std::vector<double> lyapunov_margin(const MpcTrace & trace, const Eigen::Matrix2d & R, double c1, double T,
                                           double delta, const State & x_star = {})
{
  const double lambda = min_eigenvalue(R);
  std::vector<double> out;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (i + 1 == trace.steps.size()) {
      out.push_back(0.0);
      break;
    }
    const auto & s     = trace.steps[i];
    const double dx    = s.state.x1 - x_star.x1;
    const double dy    = s.state.x2 - x_star.x2;
    const double dh    = wrap_angle(s.state.x3 - x_star.x3);
    const double sq    = dx * dx + dy * dy + dh * dh;
    const double decay = s.value - trace.steps[i + 1].value;
    out.push_back(decay - lambda * c1 * delta * sq / (T * T));
  }
  return out;
}

// ---------------------------------------------------------------------------
// r* threshold

/// Minimum of ||u||_R^2 over the boundary of the box [-ubar, ubar]: the largest R-ellipsoid level inside the box.
inline double compute_rstar(const Eigen::Matrix2d & R, const ControlValue & ubar)
{
  if (!(ubar.u1 > 0.0 && ubar.u2 > 0.0)) { throw std::invalid_argument("box must contain 0 in its interior"); }
  if (!(min_eigenvalue(R) > 0.0)) { throw std::invalid_argument("R must be positive definite"); }
  double best = std::numeric_limits<double>::infinity();
  // facets u1 = +-ubar1: R11 a^2 + 2 R12 a s + R22 s^2 over s in [-ubar2, ubar2]
  for (double a : {ubar.u1, -ubar.u1}) {
    const double s = std::clamp(-R(0, 1) * a / R(1, 1), -ubar.u2, ubar.u2);
    best           = std::min(best, quad_form({a, s}, R));
  }
  for (double b : {ubar.u2, -ubar.u2}) {
    const double s = std::clamp(-R(0, 1) * b / R(0, 0), -ubar.u1, ubar.u1);
    best           = std::min(best, quad_form({s, b}, R));
  }
  return best;
}

/**
 * Largest |u_i| / ubar_i over `samples` points of the ellipse u^T R u = level.
 * A value <= 1 means the sampled ellipse lies inside the box.
 */
inline double ellipse_box_ratio(const Eigen::Matrix2d & R, double level, const ControlValue & ubar, int samples = 10000)
{
  const Eigen::Matrix2d L = Eigen::LLT<Eigen::Matrix2d>(R).matrixL();
  const Eigen::Matrix2d M = L.transpose().inverse();  // u = sqrt(level) M (cos, sin)
  double worst            = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double th         = 2.0 * std::numbers::pi * k / samples;
    const Eigen::Vector2d u = std::sqrt(level) * M * Eigen::Vector2d(std::cos(th), std::sin(th));
    worst                   = std::max({worst, std::abs(u(0)) / ubar.u1, std::abs(u(1)) / ubar.u2});
  }
  return worst;
}

}  // namespace trim_mpc
