#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "costs.hpp"
#include "robot_model.hpp"
#include "symmetry.hpp"

namespace trim_mpc {

/// Constant control value with a label. Id 1 is reserved for rest (0, 0) when present.
struct TrimPrimitive
{
  int id{0};
  ControlValue u;
  std::string name;
};

class TrimLibrary
{
public:
  TrimLibrary() = default;
  explicit TrimLibrary(std::vector<TrimPrimitive> trims) : trims_(std::move(trims)) { validate(); }

  const std::vector<TrimPrimitive> & trims() const { return trims_; }
  std::size_t size() const { return trims_.size(); }

  const TrimPrimitive & at(int id) const
  {
    for (const auto & t : trims_) {
      if (t.id == id) { return t; }
    }
    throw std::out_of_range("trim id " + std::to_string(id) + " not in library");
  }

  bool contains(int id) const
  {
    return std::any_of(trims_.begin(), trims_.end(), [id](const auto & t) { return t.id == id; });
  }

  std::optional<int> find(const ControlValue & u) const
  {
    for (const auto & t : trims_) {
      if (t.u == u) { return t.id; }
    }
    return std::nullopt;
  }

  std::optional<int> rest_id() const { return find(ControlValue{0.0, 0.0}); }

  /// Throws std::invalid_argument naming the offending ids.
  void validate() const
  {
    if (trims_.empty()) { throw std::invalid_argument("trim library is empty"); }
    for (std::size_t i = 0; i < trims_.size(); ++i) {
      const auto & a = trims_[i];
      if (!std::isfinite(a.u.u1) || !std::isfinite(a.u.u2)) {
        throw std::invalid_argument("trim " + std::to_string(a.id) + " has a non-finite control");
      }
      if (a.id == 1 && !(a.u == ControlValue{})) {
        // id 1 is reserved for rest only when rest is present at all
        if (find(ControlValue{}).has_value()) {
          throw std::invalid_argument("trim id 1 is reserved for rest (0, 0)");
        }
      }
      for (std::size_t j = i + 1; j < trims_.size(); ++j) {
        const auto & b = trims_[j];
        if (a.id == b.id) { throw std::invalid_argument("duplicate trim id " + std::to_string(a.id)); }
        if (a.u == b.u) {
          throw std::invalid_argument(
            "trims " + std::to_string(a.id) + " and " + std::to_string(b.id) + " have the same control value");
        }
      }
    }
  }

  bool operator==(const TrimLibrary & o) const
  {
    if (trims_.size() != o.trims_.size()) { return false; }
    for (std::size_t i = 0; i < trims_.size(); ++i) {
      if (trims_[i].id != o.trims_[i].id || !(trims_[i].u == o.trims_[i].u) || trims_[i].name != o.trims_[i].name) {
        return false;
      }
    }
    return true;
  }

private:
  std::vector<TrimPrimitive> trims_;
};

/// The five-trim library used for the parking experiments.
inline TrimLibrary default_library()
{
  return TrimLibrary({
    {1, {0.0, 0.0}, "rest"},
    {2, {1.5, 0.0}, "move straight"},
    {3, {-0.25, -1.0}, "circle clockwise"},
    {4, {-0.25, 1.0}, "circle anti-clockwise"},
    {5, {0.0, 1.0}, "turn on the spot"},
  });
}

struct PlanSegment
{
  int id{0};
  double duration{0.0};

  bool operator==(const PlanSegment &) const = default;
};

/// Finite sequence of trims with durations.
struct TrimPlan
{
  std::vector<PlanSegment> segments;

  double total_duration() const
  {
    double t = 0.0;
    for (const auto & s : segments) { t += s.duration; }
    return t;
  }

  std::vector<int> ids() const
  {
    std::vector<int> out;
    out.reserve(segments.size());
    for (const auto & s : segments) { out.push_back(s.id); }
    return out;
  }

  bool empty() const { return segments.empty(); }
};

/// Drops zero-duration segments and merges adjacent equal trims.
inline TrimPlan canonical(const TrimPlan & plan)
{
  TrimPlan out;
  for (const auto & s : plan.segments) {
    if (!(s.duration > 0.0)) { continue; }
    if (!out.segments.empty() && out.segments.back().id == s.id) {
      out.segments.back().duration += s.duration;
    } else {
      out.segments.push_back(s);
    }
  }
  return out;
}

inline void check_plan(const TrimLibrary & lib, const TrimPlan & plan)
{
  for (const auto & s : plan.segments) {
    if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) { throw std::invalid_argument("plan durations must be >= 0"); }
    if (!lib.contains(s.id)) { throw std::invalid_argument("plan references unknown trim " + std::to_string(s.id)); }
  }
}

inline PiecewiseControl to_piecewise(const TrimLibrary & lib, const TrimPlan & plan)
{
  PiecewiseControl pc;
  pc.segments.reserve(plan.segments.size());
  for (const auto & s : plan.segments) { pc.segments.push_back({lib.at(s.id).u, s.duration}); }
  return pc;
}

/// Part of the plan on [0, t).
inline TrimPlan take_prefix(const TrimPlan & plan, double t)
{
  TrimPlan out;
  double left = t;
  for (const auto & s : plan.segments) {
    if (left <= 0.0) { break; }
    const double d = std::min(left, s.duration);
    out.segments.push_back({s.id, d});
    left -= d;
  }
  return out;
}

/// Part of the plan on [t, end), re-based to start at zero.
inline TrimPlan drop_prefix(const TrimPlan & plan, double t)
{
  TrimPlan out;
  double skip = t;
  for (const auto & s : plan.segments) {
    if (skip >= s.duration) {
      skip -= s.duration;
      continue;
    }
    out.segments.push_back({s.id, s.duration - std::max(skip, 0.0)});
    skip = 0.0;
  }
  return out;
}

struct PlanTrajectory
{
  std::vector<TimedState> samples;  ///< includes every switching instant
  std::vector<double> switch_times;
  State endpoint;
};

/**
 * @brief Concatenated closed-form flow of a plan.
 *
 * Segment i starts at x(t_{i-1}) and follows act(exp(xi_i (t - t_{i-1})), x(t_{i-1})),
 * with xi_i recomputed from the segment's control and start state. With
 * max_dt > 0 every segment is additionally sampled at spacing <= max_dt.
 */
inline PlanTrajectory plan_flow(const TrimLibrary & lib, const TrimPlan & plan, const State & x0, double max_dt = 0.0)
{
  PlanTrajectory out;
  out.samples.push_back({0.0, x0});
  State x  = x0;
  double t = 0.0;
  for (const auto & s : plan.segments) {
    const AlgebraElement xi = xi_from(lib.at(s.id).u, x);
    if (max_dt > 0.0 && s.duration > max_dt) {
      const auto n = static_cast<std::size_t>(std::ceil(s.duration / max_dt));
      for (std::size_t k = 1; k < n; ++k) {
        const double tau = s.duration * static_cast<double>(k) / static_cast<double>(n);
        out.samples.push_back({t + tau, act(exp(xi, tau), x)});
      }
    }
    x = act(exp(xi, s.duration), x);
    t += s.duration;
    out.switch_times.push_back(t);
    out.samples.push_back({t, x});
  }
  out.endpoint = x;
  return out;
}

/// Endpoint only; no allocation beyond the library lookups.
inline State plan_endpoint(const TrimLibrary & lib, const TrimPlan & plan, const State & x0)
{
  State x = x0;
  for (const auto & s : plan.segments) { x = act(exp(xi_from(lib.at(s.id).u, x), s.duration), x); }
  return x;
}

/// Cost rate along the trim from x0. The stage-cost family has no state
/// dependence, so this is the same for every start state.
inline double unit_cost(const TrimPrimitive & trim, const State & /*x0*/, const StageCost & cost)
{
  return rate(cost, trim.u);
}

inline double plan_cost(const TrimLibrary & lib, const TrimPlan & plan, const StageCost & cost)
{
  double j = 0.0;
  for (const auto & s : plan.segments) { j += s.duration * rate(cost, lib.at(s.id).u); }
  return j;
}

}  // namespace trim_mpc
