#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocp.hpp"
#include "problem.hpp"
#include "symmetry.hpp"
#include "trim_library.hpp"

namespace trim_mpc {

struct MpcConfig
{
  double delta{0.1};
  double stop_tol{1e-6};
  int max_steps{100};

  void validate() const
  {
    if (!(delta > 0.0) || !std::isfinite(delta)) { throw std::invalid_argument("delta must be positive"); }
    if (!(stop_tol >= 0.0)) { throw std::invalid_argument("stop_tol must be >= 0"); }
    if (max_steps < 0) { throw std::invalid_argument("max_steps must be >= 0"); }
  }
};

struct MpcStep
{
  double t{0.0};
  State state;
  double value{0.0};     ///< open-loop optimal value V at this state
  TrimPlan applied;      ///< controls used on [t, t + applied duration)
  double step_cost{0.0};
  bool replanned{false};
  OcpSolution solution;  ///< the full open-loop plan computed at this state
  bool terminal{false};  ///< record of the final state, nothing applied
};

enum class Termination { reached, stalled };

inline std::string to_string(Termination t) { return t == Termination::reached ? "reached" : "stalled"; }

struct MpcTrace
{
  std::vector<MpcStep> steps;
  double closed_loop_cost{0.0};
  Termination terminated{Termination::stalled};
  State final_state;

  /// Number of control steps actually applied.
  std::size_t control_steps() const
  {
    return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const auto & s) { return !s.terminal; }));
  }
};

namespace detail {

/// Canonical plan with near-zero segments and trailing rest removed.
inline TrimPlan comparable_plan(const TrimPlan & plan, std::optional<int> rest, double tol)
{
  TrimPlan trimmed;
  for (const auto & s : plan.segments) {
    if (s.duration > tol) { trimmed.segments.push_back(s); }
  }
  auto c = canonical(trimmed);
  if (rest && !c.segments.empty() && c.segments.back().id == *rest) { c.segments.pop_back(); }
  return c;
}

}  // namespace detail

/**
 * True when curr is not the remainder of prev after `prev_applied` seconds,
 * comparing canonical plans with trailing rest ignored and durations to `tol`.
 */
inline bool detect_replanning(const OcpSolution & prev, double prev_applied, const OcpSolution & curr,
                              std::optional<int> rest_id = 1, double tol = 1e-6)
{
  const auto a = detail::comparable_plan(drop_prefix(prev.plan, prev_applied), rest_id, tol);
  const auto b = detail::comparable_plan(curr.plan, rest_id, tol);
  if (a.segments.size() != b.segments.size()) { return true; }
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    if (a.segments[i].id != b.segments[i].id) { return true; }
    if (std::abs(a.segments[i].duration - b.segments[i].duration) > tol) { return true; }
  }
  return false;
}

/// Distance to the target with the heading compared modulo 2 pi.
inline double target_distance(const State & x, const State & x_star) { return state_distance(x, x_star); }

/**
 * @brief Receding-horizon loop.
 *
 * At each sampling instant the OCP is solved from the current state, the
 * optimal plan is applied for min(delta, T*) and the state is advanced along
 * the closed-form flow. The remainder of the previous plan (padded with rest
 * for a fixed horizon) is handed to the solver as an incumbent, so the value
 * never increases from one step to the next. A final record with the state
 * reached is appended when the loop ends at the target.
 *
 * Throws InfeasibleProblem when the first OCP has no solution.
 */
inline MpcTrace run(const ProblemSpec & p, const MpcConfig & cfg, OcpOptions opts = {})
{
  p.validate();
  cfg.validate();
  opts.tie_delta        = cfg.delta;
  const TrimLibrary lib = p.library();
  const auto rest       = lib.rest_id();

  MpcTrace trace;
  ProblemSpec current = p;
  double t            = 0.0;
  std::optional<OcpSolution> prev;
  double prev_applied = 0.0;

  for (int i = 0;; ++i) {
    if (target_distance(current.x_hat, p.x_star) <= cfg.stop_tol) {
      MpcStep last;
      last.t        = t;
      last.state    = current.x_hat;
      last.terminal = true;
      ProblemSpec at = current;
      at.x_hat       = p.x_star;
      last.solution  = solve(at, opts);
      last.value     = last.solution.value;
      trace.steps.push_back(last);
      trace.terminated = Termination::reached;
      break;
    }
    if (i >= cfg.max_steps) {
      trace.terminated = Termination::stalled;
      break;
    }

    opts.incumbent.reset();
    if (prev) {
      TrimPlan tail = drop_prefix(prev->plan, prev_applied);
      if (p.horizon && rest) {
        const double missing = *p.horizon - tail.total_duration();
        if (missing > 0.0) { tail.segments.push_back({*rest, missing}); }
      }
      if (static_cast<int>(canonical(tail).segments.size()) <= p.max_segments) { opts.incumbent = tail; }
    }

    MpcStep step;
    step.t     = t;
    step.state = current.x_hat;
    try {
      step.solution = solve(current, opts);
    } catch (const InfeasibleProblem &) {
      if (i == 0) { throw InfeasibleProblem("initially infeasible"); }
      throw;
    }
    step.value     = step.solution.value;
    step.replanned = prev && detect_replanning(*prev, prev_applied, step.solution, rest);

    const double apply = std::min(cfg.delta, step.solution.t_star);
    step.applied       = take_prefix(step.solution.plan, apply);
    step.step_cost     = plan_cost(lib, step.applied, p.cost);
    trace.closed_loop_cost += step.step_cost;

    current.x_hat = plan_endpoint(lib, step.applied, current.x_hat);
    t += step.applied.total_duration();
    prev         = step.solution;
    prev_applied = apply;
    trace.steps.push_back(std::move(step));
  }
  trace.final_state = current.x_hat;
  return trace;
}

struct FiniteTimeCheck
{
  bool holds{true};
  double worst_slack{0.0};  ///< min over steps of V0 - i delta c3 - V(x_i)
  std::optional<std::size_t> first_violation;
  long bound{0};            ///< ceil(V(x0) / (delta c3))
  std::size_t steps{0};     ///< control steps realized
};

/**
 * Telescope check for the time-penalized setting: V(x_i) <= V(x0) - i delta c3
 * (+1e-6) at every sampling instant where a control was applied, and the
 * number of control steps is at most ceil(V(x0) / (delta c3)).
 */
inline FiniteTimeCheck finite_time_bound(const MpcTrace & trace, double c3, double delta, double tol = 1e-6)
{
  if (!(c3 > 0.0) || !(delta > 0.0)) { throw std::invalid_argument("finite-time bound needs c3 > 0 and delta > 0"); }
  FiniteTimeCheck out;
  if (trace.steps.empty()) { return out; }
  const double v0 = trace.steps.front().value;
  out.bound       = static_cast<long>(std::ceil(v0 / (delta * c3) - 1e-12));
  out.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto & s = trace.steps[i];
    if (s.terminal) { continue; }
    const double slack = v0 - static_cast<double>(i) * delta * c3 - s.value;
    out.worst_slack    = std::min(out.worst_slack, slack);
    if (slack < -tol && !out.first_violation) {
      out.first_violation = i;
      out.holds           = false;
    }
  }
  if (!std::isfinite(out.worst_slack)) { out.worst_slack = 0.0; }
  out.steps = trace.control_steps();
  if (static_cast<long>(out.steps) > out.bound) { out.holds = false; }
  return out;
}

}  // namespace trim_mpc
