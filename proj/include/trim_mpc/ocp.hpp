#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>

#include "costs.hpp"
#include "detail/optim.hpp"
#include "detail/parallel.hpp"
#include "problem.hpp"
#include "robot_model.hpp"
#include "symmetry.hpp"
#include "trim_library.hpp"

namespace trim_mpc {

inline constexpr double kEndpointTol = 1e-6;
inline constexpr double kTieTol      = 1e-9;

/// No admissible plan exists for the problem (or none was found).
class InfeasibleProblem : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct OcpOptions
{
  int multi_starts{8};
  int max_outer{200};
  double endpoint_tol{kEndpointTol};
  double tie_tol{kTieTol};
  /// Window [0, delta) for the maximal-early-cost tie-break; defaults to the first segment.
  std::optional<double> tie_delta;
  std::uint64_t seed{0x5eed};
  unsigned threads{0};
  /// A plan known to be admissible (e.g. the shifted previous MPC plan).
  std::optional<TrimPlan> incumbent;
  bool exact_straight_line{true};
  double box_sample_dt{1e-2};
  /// Upper bound on a single duration in free-time mode.
  double free_time_max_duration{1e3};
};

struct OcpSolution
{
  TrimPlan plan;
  double value{0.0};
  double t_star{0.0};
  std::size_t sequence_rank{0};
};

enum class SequenceStatus { ok, infeasible, degenerate };

struct SequenceResult
{
  SequenceStatus status{SequenceStatus::infeasible};
  OcpSolution solution;
};

// ---------------------------------------------------------------------------
// Turn-move-turn construction

namespace detail {

/// Time-shortest turn by `angle` using turn rates +w_pos (> 0) and -w_neg (w_neg > 0, or 0 when unavailable).
inline ControlSegment turn_segment(double angle, double w_pos, double w_neg)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double a          = wrap_angle(angle);
  const double ccw        = a >= 0.0 ? a : a + two_pi;  // counter-clockwise amount in [0, 2pi)
  const double cw         = two_pi - ccw;
  if (ccw == 0.0) { return {{0.0, w_pos}, 0.0}; }
  const double t_pos = ccw / w_pos;
  if (w_neg > 0.0 && cw / w_neg < t_pos) { return {{0.0, -w_neg}, cw / w_neg}; }
  return {{0.0, w_pos}, t_pos};
}

}  // namespace detail

/**
 * @brief Turn towards the target position, move straight, turn to the target heading.
 *
 * Uses (0, +-ubar.u2) for turning and (ubar.u1, 0) for moving; turns take the
 * shorter angular direction unless `allow_negative_turn` is false. Always three
 * segments (zero-duration turns are kept); empty when x_hat == x_star.
 */
inline PiecewiseControl feasible_controls(
  const State & x_hat, const State & x_star, const ControlValue & ubar, bool allow_negative_turn = true)
{
  if (!(ubar.u1 > 0.0 && ubar.u2 > 0.0)) { throw std::invalid_argument("turn-move-turn needs positive ubar"); }
  PiecewiseControl pc;
  if (x_hat == x_star) { return pc; }
  const double dx   = x_star.x1 - x_hat.x1;
  const double dy   = x_star.x2 - x_hat.x2;
  const double dist = std::hypot(dx, dy);
  const double w_neg = allow_negative_turn ? ubar.u2 : 0.0;
  if (dist > 0.0) {
    const double phi = std::atan2(dy, dx);
    pc.segments.push_back(detail::turn_segment(phi - x_hat.x3, ubar.u2, w_neg));
    pc.segments.push_back({{ubar.u1, 0.0}, dist / ubar.u1});
    const double heading = x_hat.x3 + pc.segments.front().u.u2 * pc.segments.front().duration;
    pc.segments.push_back(detail::turn_segment(x_star.x3 - heading, ubar.u2, w_neg));
  } else {
    pc.segments.push_back({{0.0, ubar.u2}, 0.0});
    pc.segments.push_back({{ubar.u1, 0.0}, 0.0});
    pc.segments.push_back(detail::turn_segment(x_star.x3 - x_hat.x3, ubar.u2, w_neg));
  }
  return pc;
}

/// Turn-move-turn plan built from the library's fastest forward move and turn-on-the-spot trims.
/// nullopt when the library lacks a forward move or a positive turn.
inline std::optional<TrimPlan> feasible_plan(const State & x_hat, const State & x_star, const TrimLibrary & lib)
{
  std::optional<int> move, turn_pos, turn_neg;
  for (const auto & t : lib.trims()) {
    if (t.u.u2 == 0.0 && t.u.u1 > 0.0 && (!move || t.u.u1 > lib.at(*move).u.u1)) { move = t.id; }
    if (t.u.u1 == 0.0 && t.u.u2 > 0.0 && (!turn_pos || t.u.u2 > lib.at(*turn_pos).u.u2)) { turn_pos = t.id; }
    if (t.u.u1 == 0.0 && t.u.u2 < 0.0 && (!turn_neg || t.u.u2 < lib.at(*turn_neg).u.u2)) { turn_neg = t.id; }
  }
  if (!move || !turn_pos) { return std::nullopt; }
  TrimPlan plan;
  if (x_hat == x_star) { return plan; }

  const double v     = lib.at(*move).u.u1;
  const double w_pos = lib.at(*turn_pos).u.u2;
  const double w_neg = turn_neg ? -lib.at(*turn_neg).u.u2 : 0.0;
  const auto as_seg  = [&](const ControlSegment & s) {
    const int id = s.u.u2 > 0.0 ? *turn_pos : *turn_neg;
    return PlanSegment{id, s.duration};
  };
  const double dx   = x_star.x1 - x_hat.x1;
  const double dy   = x_star.x2 - x_hat.x2;
  const double dist = std::hypot(dx, dy);
  double heading    = x_hat.x3;
  if (dist > 0.0) {
    const auto t1 = detail::turn_segment(std::atan2(dy, dx) - heading, w_pos, w_neg);
    plan.segments.push_back(as_seg(t1));
    heading += t1.u.u2 * t1.duration;
    plan.segments.push_back({*move, dist / v});
  } else {
    plan.segments.push_back({*turn_pos, 0.0});
    plan.segments.push_back({*move, 0.0});
  }
  plan.segments.push_back(as_seg(detail::turn_segment(x_star.x3 - heading, w_pos, w_neg)));
  return plan;
}

// ---------------------------------------------------------------------------
// Sequence enumeration

/// All ids.size()^S sequences of length S in lexicographic order of the sorted ids.
inline std::vector<std::vector<int>> enumerate_sequences(std::vector<int> ids, int S)
{
  if (S < 1) { throw std::invalid_argument("S must be >= 1"); }
  std::sort(ids.begin(), ids.end());
  std::vector<std::vector<int>> out;
  if (ids.empty()) { return out; }
  std::vector<std::size_t> digit(static_cast<std::size_t>(S), 0);
  while (true) {
    std::vector<int> seq(digit.size());
    for (std::size_t i = 0; i < digit.size(); ++i) { seq[i] = ids[digit[i]]; }
    out.push_back(std::move(seq));
    std::size_t pos = digit.size();
    while (pos > 0) {
      --pos;
      if (++digit[pos] < ids.size()) { break; }
      digit[pos] = 0;
      if (pos == 0) { return out; }
    }
  }
}

/// Adjacent-equal merge of a trim-id sequence.
inline std::vector<int> merge_adjacent(const std::vector<int> & seq)
{
  std::vector<int> out;
  for (int id : seq) {
    if (out.empty() || out.back() != id) { out.push_back(id); }
  }
  return out;
}

struct CandidateSequence
{
  std::vector<int> ids;
  std::size_t rank{0};  ///< index of the first raw sequence producing it
};

/**
 * Distinct canonical sequences for the search: adjacent duplicates merged and
 * rest allowed only as the final trim (rest segments can be moved to the end
 * without changing endpoint or cost). In free-time mode rest is excluded.
 */
inline std::vector<CandidateSequence> candidate_sequences(const TrimLibrary & lib, int S, bool free_time,
                                                          std::size_t max_raw = 20'000'000)
{
  std::vector<int> ids;
  for (const auto & t : lib.trims()) { ids.push_back(t.id); }
  std::sort(ids.begin(), ids.end());
  const auto rest = lib.rest_id();

  const double raw = std::pow(static_cast<double>(ids.size()), S);
  if (raw > static_cast<double>(max_raw)) {
    throw std::invalid_argument("control set too large for exhaustive sequence enumeration (" +
                                std::to_string(ids.size()) + "^" + std::to_string(S) + ")");
  }

  std::vector<CandidateSequence> out;
  std::set<std::vector<int>> seen;
  std::vector<std::size_t> digit(static_cast<std::size_t>(S), 0);
  std::size_t rank = 0;
  for (;; ++rank) {
    std::vector<int> seq(digit.size());
    for (std::size_t i = 0; i < digit.size(); ++i) { seq[i] = ids[digit[i]]; }
    auto canon = merge_adjacent(seq);
    bool ok    = true;
    if (rest) {
      for (std::size_t i = 0; i < canon.size(); ++i) {
        if (canon[i] == *rest && (free_time || i + 1 != canon.size())) { ok = false; }
      }
    }
    if (ok && seen.insert(canon).second) { out.push_back({std::move(canon), rank}); }

    std::size_t pos = digit.size();
    bool done       = true;
    while (pos > 0) {
      --pos;
      if (++digit[pos] < ids.size()) {
        done = false;
        break;
      }
      digit[pos] = 0;
    }
    if (done) { break; }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Switching-time optimization for a fixed sequence

namespace detail {

inline State sequence_endpoint(const std::vector<ControlValue> & us, const Eigen::VectorXd & tau, const State & x0)
{
  State x = x0;
  for (std::size_t i = 0; i < us.size(); ++i) { x = flow_const(x, us[i], tau(static_cast<Eigen::Index>(i))); }
  return x;
}

/**
 * Exact Jacobian of the endpoint constraints with respect to the durations.
 *
 * Lengthening segment i by dt adds f(x(t_i), u_i) dt at the segment's end; the
 * later segments carry a position offset along unchanged and turn a heading
 * offset dh into J (p_end - p(t_i)) dh, J being the quarter-turn rotation.
 */
inline Eigen::MatrixXd constraint_jacobian(const std::vector<ControlValue> & us, const Eigen::VectorXd & tau,
                                           const State & x0, const State & x_star, bool fixed)
{
  const auto k = static_cast<Eigen::Index>(us.size());
  std::vector<State> ends(us.size());
  State x = x0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    x       = flow_const(x, us[i], tau(static_cast<Eigen::Index>(i)));
    ends[i] = x;
  }
  const State & e = x;
  Eigen::MatrixXd J(fixed ? 4 : 3, k);
  const double dh = std::cos(0.5 * (e.x3 - x_star.x3));  // derivative of 2 sin(d/2)
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto & u = us[static_cast<std::size_t>(i)];
    const auto & s = ends[static_cast<std::size_t>(i)];
    J(0, i)        = u.u1 * std::cos(s.x3) - u.u2 * (e.x2 - s.x2);
    J(1, i)        = u.u1 * std::sin(s.x3) + u.u2 * (e.x1 - s.x1);
    J(2, i)        = dh * u.u2;
    if (fixed) { J(3, i) = 1.0; }
  }
  return J;
}

/// Greedy assignment of a plan's durations onto a sequence; nullopt if the plan does not embed.
inline std::optional<Eigen::VectorXd> embed_plan(const std::vector<int> & seq, const TrimPlan & plan)
{
  Eigen::VectorXd tau = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(seq.size()));
  std::size_t i       = 0;
  for (const auto & s : canonical(plan).segments) {
    while (i < seq.size() && seq[i] != s.id) { ++i; }
    if (i == seq.size()) { return std::nullopt; }
    tau(static_cast<Eigen::Index>(i)) += s.duration;
  }
  return tau;
}

inline double integral_over_prefix(const TrimLibrary & lib, const TrimPlan & plan, const StageCost & cost, double delta)
{
  return plan_cost(lib, take_prefix(plan, delta), cost);
}

}  // namespace detail

inline bool plan_in_box(const TrimLibrary & lib, const TrimPlan & plan, const State & x0, const StateBox & box, double dt)
{
  const auto traj = plan_flow(lib, plan, x0, dt);
  return std::all_of(traj.samples.begin(), traj.samples.end(), [&](const auto & s) { return box.contains(s.x, 1e-9); });
}

/// True when the plan is admissible for p: endpoint, horizon, segment count, box.
inline bool is_admissible(const ProblemSpec & p, const TrimLibrary & lib, const TrimPlan & plan, double endpoint_tol,
                          double box_dt = 1e-2)
{
  for (const auto & s : plan.segments) {
    if (!(s.duration >= 0.0) || !lib.contains(s.id)) { return false; }
  }
  if (static_cast<int>(canonical(plan).segments.size()) > p.max_segments) { return false; }
  if (p.horizon && std::abs(plan.total_duration() - *p.horizon) > 1e-9) { return false; }
  const State end = plan_endpoint(lib, plan, p.x_hat);
  if (std::hypot(end.x1 - p.x_star.x1, end.x2 - p.x_star.x2) > endpoint_tol) { return false; }
  if (std::abs(wrap_angle(end.x3 - p.x_star.x3)) > endpoint_tol) { return false; }
  if (p.state_box && !plan_in_box(lib, plan, p.x_hat, *p.state_box, box_dt)) { return false; }
  return true;
}

/**
 * @brief Optimal switching times for a fixed trim sequence.
 *
 * Minimizes sum(tau_i * rate(u_i)) over tau >= 0 subject to the endpoint
 * constraint (position, heading mod 2 pi) and, for a fixed horizon,
 * sum(tau) = T. Augmented-Lagrangian outer loop, projected BFGS inner loop,
 * central-difference constraint Jacobians, several random starts plus any
 * warm starts, followed by a Newton projection onto the constraints.
 */
inline SequenceResult solve_fixed_sequence(const ProblemSpec & p, const TrimLibrary & lib, const std::vector<int> & seq,
                                           const OcpOptions & opts = {}, std::size_t rank = 0,
                                           const std::vector<Eigen::VectorXd> & warm_starts = {})
{
  using Eigen::VectorXd;
  if (seq.empty()) { throw std::invalid_argument("empty trim sequence"); }
  const auto k     = static_cast<Eigen::Index>(seq.size());
  const bool fixed = p.horizon.has_value();
  const double T   = fixed ? *p.horizon : 0.0;

  std::vector<ControlValue> us;
  VectorXd r(k);
  bool all_rest = true;
  for (Eigen::Index i = 0; i < k; ++i) {
    us.push_back(lib.at(seq[static_cast<std::size_t>(i)]).u);
    r(i) = rate(p.cost, us.back());
    if (!(us.back() == ControlValue{})) { all_rest = false; }
  }

  SequenceResult result;
  result.solution.sequence_rank = rank;
  const bool at_target          = state_distance(p.x_hat, p.x_star) <= opts.endpoint_tol;
  if (all_rest && !at_target) {
    result.status = SequenceStatus::degenerate;
    return result;
  }

  std::optional<Eigen::Index> rest_index;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (us[static_cast<std::size_t>(i)] == ControlValue{}) { rest_index = i; }
  }

  const Eigen::Index m = fixed ? 4 : 3;
  const auto constraints = [&](const VectorXd & tau) {
    const State e = detail::sequence_endpoint(us, tau, p.x_hat);
    VectorXd c(m);
    c(0) = e.x1 - p.x_star.x1;
    c(1) = e.x2 - p.x_star.x2;
    c(2) = 2.0 * std::sin(0.5 * (e.x3 - p.x_star.x3));  // smooth, zero iff heading matches mod 2 pi
    if (fixed) { c(3) = tau.sum() - T; }
    return c;
  };
  const auto jacobian = [&](const VectorXd & tau) {
    return detail::constraint_jacobian(us, tau, p.x_hat, p.x_star, fixed);
  };

  const double upper = fixed ? T : opts.free_time_max_duration;
  const VectorXd lb  = VectorXd::Zero(k);
  const VectorXd ub  = VectorXd::Constant(k, upper);

  // Scale for random free-time starts: turn-move-turn duration if available.
  double scale = T;
  if (!fixed) {
    scale = 10.0;
    if (const auto tmt = feasible_plan(p.x_hat, p.x_star, lib)) { scale = std::max(1.0, tmt->total_duration()); }
  }

  std::vector<VectorXd> starts = warm_starts;
  std::mt19937_64 rng(opts.seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(rank) + 1)));
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < opts.multi_starts; ++s) {
    VectorXd tau(k);
    if (fixed) {
      for (Eigen::Index i = 0; i < k; ++i) { tau(i) = expo(rng); }
      tau *= T / tau.sum();
    } else {
      for (Eigen::Index i = 0; i < k; ++i) { tau(i) = scale * unif(rng); }
    }
    starts.push_back(tau);
  }

  const auto finish = [&](VectorXd tau) -> std::optional<OcpSolution> {
    tau = detail::project(tau, lb, ub);
    // Newton projection onto the constraint manifold over the positive durations.
    for (int it = 0; it < 30; ++it) {
      const VectorXd c = constraints(tau);
      if (c.lpNorm<Eigen::Infinity>() < 1e-13) { break; }
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (tau(i) > 1e-12) { free.push_back(i); }
      }
      if (free.empty()) { break; }
      const Eigen::MatrixXd J = jacobian(tau);
      Eigen::MatrixXd Jf(m, static_cast<Eigen::Index>(free.size()));
      for (std::size_t j = 0; j < free.size(); ++j) { Jf.col(static_cast<Eigen::Index>(j)) = J.col(free[j]); }
      const VectorXd step = Jf.completeOrthogonalDecomposition().solve(-c);
      VectorXd next       = tau;
      for (std::size_t j = 0; j < free.size(); ++j) { next(free[j]) += step(static_cast<Eigen::Index>(j)); }
      next = detail::project(next, lb, ub);
      if (constraints(next).lpNorm<Eigen::Infinity>() >= c.lpNorm<Eigen::Infinity>()) { break; }
      tau = next;
    }
    if (fixed && rest_index) {
      const double others = tau.sum() - tau(*rest_index);
      if (others <= T) { tau(*rest_index) = T - others; }
    }

    OcpSolution sol;
    sol.sequence_rank = rank;
    for (Eigen::Index i = 0; i < k; ++i) { sol.plan.segments.push_back({seq[static_cast<std::size_t>(i)], tau(i)}); }
    sol.value  = r.dot(tau);
    sol.t_star = fixed ? T : tau.sum();
    if (!is_admissible(p, lib, sol.plan, opts.endpoint_tol, opts.box_sample_dt)) { return std::nullopt; }
    return sol;
  };

  std::optional<OcpSolution> best;
  const auto consider = [&](const std::optional<OcpSolution> & sol) {
    if (sol && (!best || sol->value < best->value - 1e-12)) { best = sol; }
  };

  for (const auto & w : warm_starts) { consider(finish(w)); }

  for (const auto & start : starts) {
    VectorXd tau  = detail::project(start, lb, ub);
    VectorXd lam  = VectorXd::Zero(m);
    double mu     = 10.0;
    double c_prev = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < opts.max_outer; ++outer) {
      const auto lagrangian = [&](const VectorXd & t, VectorXd & g) {
        const VectorXd c = constraints(t);
        const Eigen::MatrixXd J = jacobian(t);
        g = r + J.transpose() * (lam + mu * c);
        return r.dot(t) + lam.dot(c) + 0.5 * mu * c.squaredNorm();
      };
      tau = detail::minimize_box_bfgs(lagrangian, tau, lb, ub, 50, 1e-9).x;
      const VectorXd c    = constraints(tau);
      const double c_norm = c.lpNorm<Eigen::Infinity>();
      if (c_norm < 1e-10) { break; }
      if (mu >= 1e10 && c_norm > 1e-4) { break; }  // no feasible point in this basin
      lam += mu * c;
      if (c_norm > 0.25 * c_prev) { mu = std::min(mu * 10.0, 1e12); }
      c_prev = c_norm;
    }
    consider(finish(tau));
  }

  if (best) {
    result.status   = SequenceStatus::ok;
    result.solution = *best;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Global solve

namespace detail {

/// Exact solution when the target lies straight ahead or behind along the
/// heading and the control set is a grid with diagonal R: the convex rate
/// along the line is interpolated between the two grid speeds adjacent to d/T.
inline std::optional<OcpSolution> straight_line_solution(const ProblemSpec & p, const TrimLibrary & lib)
{
  const auto * grid = std::get_if<GridControlSet>(&p.control_set);
  if (!grid || !p.horizon || p.state_box || p.cost.R(0, 1) != 0.0) { return std::nullopt; }
  const double T  = *p.horizon;
  const double c  = std::cos(p.x_hat.x3), s = std::sin(p.x_hat.x3);
  const double dx = p.x_star.x1 - p.x_hat.x1, dy = p.x_star.x2 - p.x_hat.x2;
  const double along = c * dx + s * dy;
  const double cross = -s * dx + c * dy;
  if (std::abs(cross) > 1e-12 || std::abs(wrap_angle(p.x_star.x3 - p.x_hat.x3)) > 1e-12) { return std::nullopt; }

  const double v  = along / T;
  const double kf = v / grid->du;
  const auto id_of = [&](int j) {
    const auto id = lib.find({grid->value(j), 0.0});
    if (!id) { throw std::logic_error("grid library is missing a straight-line control"); }
    return *id;
  };
  OcpSolution sol;
  sol.t_star = T;
  if (std::abs(kf - std::round(kf)) < 1e-9) {
    const int j = static_cast<int>(std::round(kf));
    if (std::abs(j) > grid->steps1()) { return std::nullopt; }
    sol.plan.segments.push_back({id_of(j), T});
    sol.value = T * rate(p.cost, lib.at(id_of(j)).u);
    return sol;
  }
  if (p.max_segments < 2) { return std::nullopt; }
  const int lo = static_cast<int>(std::floor(kf));
  const int hi = lo + 1;
  if (lo < -grid->steps1() || hi > grid->steps1()) { return std::nullopt; }
  const double u_lo = grid->value(lo), u_hi = grid->value(hi);
  const double t_hi = (along - T * u_lo) / (u_hi - u_lo);
  const double t_lo = T - t_hi;
  const double r_lo = rate(p.cost, {u_lo, 0.0}), r_hi = rate(p.cost, {u_hi, 0.0});
  // larger rate first: maximal cost on the initial interval among equal-value plans
  if (r_hi >= r_lo) {
    sol.plan.segments = {{id_of(hi), t_hi}, {id_of(lo), t_lo}};
  } else {
    sol.plan.segments = {{id_of(lo), t_lo}, {id_of(hi), t_hi}};
  }
  sol.value = t_hi * r_hi + t_lo * r_lo;
  return sol;
}

}  // namespace detail

/// True when `a` should be preferred over `b`: smaller value, then larger cost on [0, delta), then lower rank.
inline bool better_solution(const ProblemSpec & p, const TrimLibrary & lib, const OcpSolution & a, const OcpSolution & b,
                            const OcpOptions & opts)
{
  if (a.value < b.value - opts.tie_tol) { return true; }
  if (b.value < a.value - opts.tie_tol) { return false; }
  double delta = 0.0;
  if (opts.tie_delta) {
    delta = *opts.tie_delta;
  } else {
    const auto first = [](const OcpSolution & s) {
      const auto c = canonical(s.plan);
      return c.segments.empty() ? 0.0 : c.segments.front().duration;
    };
    delta = std::min(first(a), first(b));
  }
  const double ea = detail::integral_over_prefix(lib, a.plan, p.cost, delta);
  const double eb = detail::integral_over_prefix(lib, b.plan, p.cost, delta);
  if (ea > eb + opts.tie_tol) { return true; }
  if (eb > ea + opts.tie_tol) { return false; }
  return a.sequence_rank < b.sequence_rank;
}

/**
 * @brief Global minimum over all trim sequences with at most S segments.
 *
 * Throws InfeasibleProblem when no sequence admits a solution.
 */
inline OcpSolution solve(const ProblemSpec & p, const OcpOptions & opts = {})
{
  p.validate();
  const TrimLibrary lib = p.library();

  if (state_distance(p.x_hat, p.x_star) <= opts.endpoint_tol) {
    OcpSolution sol;
    if (p.horizon) {
      const auto rest = lib.rest_id();
      if (rest) {
        sol.plan.segments.push_back({*rest, *p.horizon});
        sol.value  = *p.horizon * p.cost.c3;
        sol.t_star = *p.horizon;
        return sol;
      }
    } else {
      return sol;
    }
  }

  if (opts.exact_straight_line) {
    if (auto sol = detail::straight_line_solution(p, lib)) { return *sol; }
  }

  const auto candidates = candidate_sequences(lib, p.max_segments, p.free_time());

  // Known admissible plans seed the sequences they embed into.
  std::vector<TrimPlan> seeds;
  if (opts.incumbent) { seeds.push_back(*opts.incumbent); }
  if (auto tmt = feasible_plan(p.x_hat, p.x_star, lib)) {
    if (p.horizon) {
      if (const auto rest = lib.rest_id(); rest && tmt->total_duration() < *p.horizon) {
        tmt->segments.push_back({*rest, *p.horizon - tmt->total_duration()});
      }
    }
    seeds.push_back(*tmt);
  }

  const auto results = detail::parallel_map<SequenceResult>(
    candidates.size(), detail::resolve_threads(opts.threads), [&](std::size_t i) {
      const auto & cand = candidates[i];
      std::vector<Eigen::VectorXd> warm;
      for (const auto & s : seeds) {
        if (auto tau = detail::embed_plan(cand.ids, s)) {
          if (p.horizon && std::abs(tau->sum() - *p.horizon) > 1e-9) {
            // pad with the trailing rest when present
            if (cand.ids.back() == lib.rest_id().value_or(-1)) {
              (*tau)(tau->size() - 1) += *p.horizon - tau->sum();
            } else {
              continue;
            }
          }
          warm.push_back(*tau);
        }
      }
      return solve_fixed_sequence(p, lib, cand.ids, opts, cand.rank, warm);
    });

  std::optional<OcpSolution> best;
  for (const auto & res : results) {
    if (res.status != SequenceStatus::ok) { continue; }
    if (!best || better_solution(p, lib, res.solution, *best, opts)) { best = res.solution; }
  }
  if (!best) { throw InfeasibleProblem("no admissible trim sequence found (initially infeasible)"); }
  return *best;
}

inline double value(const ProblemSpec & p, const OcpOptions & opts = {}) { return solve(p, opts).value; }

}  // namespace trim_mpc
