#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "symmetry.hpp"

namespace trim_mpc {

enum class NormKind { L1, L2, Linf };

inline double norm(const ControlValue & u, NormKind kind)
{
  switch (kind) {
  case NormKind::L1: return std::abs(u.u1) + std::abs(u.u2);
  case NormKind::Linf: return std::max(std::abs(u.u1), std::abs(u.u2));
  case NormKind::L2: break;
  }
  return std::hypot(u.u1, u.u2);
}

inline std::string_view to_string(NormKind k)
{
  switch (k) {
  case NormKind::L1: return "L1";
  case NormKind::Linf: return "Linf";
  case NormKind::L2: break;
  }
  return "L2";
}

inline NormKind norm_kind_from_string(std::string_view s)
{
  if (s == "L1") { return NormKind::L1; }
  if (s == "L2") { return NormKind::L2; }
  if (s == "Linf") { return NormKind::Linf; }
  throw std::invalid_argument("unknown norm kind '" + std::string(s) + "'");
}

/// u^T R u
inline double quad_form(const ControlValue & u, const Eigen::Matrix2d & R)
{
  const Eigen::Vector2d v(u.u1, u.u2);
  return v.dot(R * v);
}

inline double r_norm(const ControlValue & u, const Eigen::Matrix2d & R) { return std::sqrt(quad_form(u, R)); }

/// Smallest eigenvalue of a symmetric 2x2 matrix.
inline double min_eigenvalue(const Eigen::Matrix2d & R)
{
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(R, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

/**
 * @brief Symmetry-invariant stage cost c1 ||u||_R^2 + c2 |||u||| + c3.
 *
 * No state dependence, so it is invariant under every group action and the
 * cost of a trim segment is its duration times the constant rate.
 */
struct StageCost
{
  double c1{1.0};
  Eigen::Matrix2d R{Eigen::Matrix2d::Identity()};
  double c2{0.0};
  NormKind norm_kind{NormKind::L2};
  double c3{0.0};

  void validate() const
  {
    if (!(c1 >= 0.0 && c2 >= 0.0 && c3 >= 0.0)) { throw std::invalid_argument("cost weights must be nonnegative"); }
    if (!(c1 + c2 + c3 > 0.0)) { throw std::invalid_argument("cost weights must not all vanish"); }
    if (!R.allFinite() || std::abs(R(0, 1) - R(1, 0)) > 1e-12) { throw std::invalid_argument("R must be symmetric"); }
    if (!(min_eigenvalue(R) > 0.0)) { throw std::invalid_argument("R must be positive definite"); }
  }
};

inline double rate(const StageCost & cost, const ControlValue & u)
{
  return cost.c1 * quad_form(u, cost.R) + cost.c2 * norm(u, cost.norm_kind) + cost.c3;
}

/// Quadratic tracking cost (x - x_ref)^T Q (x - x_ref) + (u - u_ref)^T Rq (u - u_ref).
/// Not invariant under the robot symmetry unless Q = 0.
struct TrackingCost
{
  Eigen::Matrix3d Q{Eigen::Matrix3d::Identity()};
  Eigen::Matrix2d Rq{Eigen::Matrix2d::Identity()};
  State x_ref;
  ControlValue u_ref;

  double operator()(const State & x, const ControlValue & u) const
  {
    const Eigen::Vector3d dx(x.x1 - x_ref.x1, x.x2 - x_ref.x2, x.x3 - x_ref.x3);
    const Eigen::Vector2d du(u.u1 - u_ref.u1, u.u2 - u_ref.u2);
    return dx.dot(Q * dx) + du.dot(Rq * du);
  }
};

struct InvarianceSample
{
  GroupElement g;
  State x;
  ControlValue u;
};

using StateControlFunction = std::function<double(const State &, const ControlValue &)>;

/// max |fn(Psi_g(x), u) - fn(x, u)| over the samples.
inline double check_invariance(const StateControlFunction & fn, const std::vector<InvarianceSample> & samples)
{
  double worst = 0.0;
  for (const auto & s : samples) { worst = std::max(worst, std::abs(fn(act(s.g, s.x), s.u) - fn(s.x, s.u))); }
  return worst;
}

inline StateControlFunction as_function(const StageCost & cost)
{
  return [cost](const State &, const ControlValue & u) { return rate(cost, u); };
}

}  // namespace trim_mpc
