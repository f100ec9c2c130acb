#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "costs.hpp"
#include "symmetry.hpp"
#include "trim_library.hpp"

namespace trim_mpc {

/// Quantized control set {du * (j, k)} inside the box [-bound, bound].
struct GridControlSet
{
  double du{0.1};
  ControlValue bound{2.0, 2.0};

  void validate() const
  {
    if (!(du > 0.0) || !std::isfinite(du)) { throw std::invalid_argument("grid spacing must be positive"); }
    if (!(bound.u1 > 0.0 && bound.u2 > 0.0)) { throw std::invalid_argument("grid bounds must be positive"); }
    if (std::abs(bound.u1 / du - std::round(bound.u1 / du)) > 1e-9 ||
        std::abs(bound.u2 / du - std::round(bound.u2 / du)) > 1e-9) {
      throw std::invalid_argument("grid bounds must be multiples of the spacing");
    }
  }

  int steps1() const { return static_cast<int>(std::round(bound.u1 / du)); }
  int steps2() const { return static_cast<int>(std::round(bound.u2 / du)); }

  /// Grid value j * du, computed without accumulating rounding error.
  double value(int j) const { return static_cast<double>(j) * du; }

  /// All grid points as a library: rest is id 1, then lexicographic in (u1, u2).
  TrimLibrary to_library() const
  {
    std::vector<TrimPrimitive> trims{{1, {0.0, 0.0}, "rest"}};
    int id = 2;
    for (int j = -steps1(); j <= steps1(); ++j) {
      for (int k = -steps2(); k <= steps2(); ++k) {
        if (j == 0 && k == 0) { continue; }
        trims.push_back({id++, {value(j), value(k)}, ""});
      }
    }
    return TrimLibrary(std::move(trims));
  }
};

using ControlSet = std::variant<TrimLibrary, GridControlSet>;

/// Axis-aligned box on (x1, x2, x3); the heading bounds are on the raw angle.
struct StateBox
{
  State lower;
  State upper;

  bool contains(const State & x, double tol = 0.0) const
  {
    return x.x1 >= lower.x1 - tol && x.x1 <= upper.x1 + tol && x.x2 >= lower.x2 - tol && x.x2 <= upper.x2 + tol &&
           x.x3 >= lower.x3 - tol && x.x3 <= upper.x3 + tol;
  }
};

struct ProblemSpec
{
  State x_hat;
  State x_star;
  std::optional<double> horizon{1.0};  ///< fixed T; nullopt means free final time
  int max_segments{4};
  ControlSet control_set{default_library()};
  std::optional<StateBox> state_box;
  StageCost cost;

  bool free_time() const { return !horizon.has_value(); }

  void validate() const
  {
    if (!is_finite(x_hat) || !is_finite(x_star)) { throw std::invalid_argument("states must be finite"); }
    if (max_segments < 1) { throw std::invalid_argument("max_segments must be >= 1"); }
    cost.validate();
    if (horizon && !(*horizon > 0.0 && std::isfinite(*horizon))) {
      throw std::invalid_argument("fixed horizon must be positive");
    }
    if (!horizon && !(cost.c3 > 0.0)) { throw std::invalid_argument("free final time requires c3 > 0"); }
    if (state_box && !state_box->contains(x_star)) { throw std::invalid_argument("x_star outside the state box"); }
    if (const auto * g = std::get_if<GridControlSet>(&control_set)) { g->validate(); }
    if (const auto * l = std::get_if<TrimLibrary>(&control_set)) { l->validate(); }
  }

  /// The control set as an explicit trim library.
  TrimLibrary library() const
  {
    if (const auto * l = std::get_if<TrimLibrary>(&control_set)) { return *l; }
    return std::get<GridControlSet>(control_set).to_library();
  }
};

struct ShiftedProblem
{
  ProblemSpec problem;
  std::optional<std::string> warning;
};

/**
 * @brief Moves a problem by the symmetry action: x_hat -> Psi_g(x_hat), x_star -> Psi_g(x_star).
 *
 * Costs are unchanged. A state box is carried along only when g maps it onto
 * another axis-aligned box (rotation by a multiple of pi/2); otherwise it is
 * dropped and a warning is returned.
 */
inline ShiftedProblem shift_problem(const GroupElement & g, const ProblemSpec & p)
{
  ShiftedProblem out{p, std::nullopt};
  out.problem.x_hat  = act(g, p.x_hat);
  out.problem.x_star = act(g, p.x_star);
  if (!p.state_box) { return out; }

  const double quarter = g.dtheta() / (0.5 * std::numbers::pi);
  if (std::abs(quarter - std::round(quarter)) > 1e-12) {
    out.problem.state_box.reset();
    out.warning = "state box is not mapped onto a box by the group element; dropped";
    return out;
  }
  const State a = act(g, p.state_box->lower);
  const State b = act(g, p.state_box->upper);
  StateBox box;
  box.lower = {std::min(a.x1, b.x1), std::min(a.x2, b.x2), std::min(a.x3, b.x3)};
  box.upper = {std::max(a.x1, b.x1), std::max(a.x2, b.x2), std::max(a.x3, b.x3)};
  out.problem.state_box = box;
  return out;
}

}  // namespace trim_mpc
