#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "costs.hpp"
#include "detail/optim.hpp"
#include "symmetry.hpp"

namespace trim_mpc {

/// sqrt(u1^2 + u2^2 + eps^2) - eps: smooth, within eps below the Euclidean norm.
inline double smooth_norm(const ControlValue & u, double epsilon = 1e-8)
{
  if (!(epsilon > 0.0)) { throw std::invalid_argument("epsilon must be positive"); }
  return std::sqrt(u.u1 * u.u1 + u.u2 * u.u2 + epsilon * epsilon) - epsilon;
}

/**
 * Trapezoidal transcription of the robot OCP on an equidistant grid. Two
 * extra states accumulate the cost: x4 the full integrand, x5 its quadratic
 * part c1 u^T R u. Controls are held constant on each of the N - 1 intervals,
 * so the trapezoidal rule evaluates the dynamics at both interval ends with
 * the same control.
 */
struct CollocationProblem
{
  int N{50};
  double T{50.0};
  State x_hat;
  State x_star;
  StageCost cost;
  double epsilon{1e-8};

  void validate() const
  {
    if (N < 2) { throw std::invalid_argument("collocation needs N >= 2"); }
    if (!(T > 0.0) || !std::isfinite(T)) { throw std::invalid_argument("horizon must be positive"); }
    if (!is_finite(x_hat) || !is_finite(x_star)) { throw std::invalid_argument("states must be finite"); }
    cost.validate();
    if (cost.c2 > 0.0 && cost.norm_kind == NormKind::Linf) {
      throw std::invalid_argument("the Linf norm is not supported by the transcription");
    }
    if (!(epsilon > 0.0)) { throw std::invalid_argument("epsilon must be positive"); }
  }

  double h() const { return T / (N - 1); }
};

inline constexpr int kCollocationStates   = 5;
inline constexpr int kCollocationControls = 2;

/// Decision vector z = [x(0..N-1) node-major, 5 per node; u(0..N-2), 2 per interval].
class CollocationNlp
{
public:
  explicit CollocationNlp(CollocationProblem p) : p_(std::move(p)) { p_.validate(); }

  const CollocationProblem & problem() const { return p_; }
  int n_vars() const { return kCollocationStates * p_.N + kCollocationControls * (p_.N - 1); }
  int n_constraints() const { return kCollocationStates * (p_.N - 1) + 8; }

  Eigen::Index xi(int k, int j) const { return kCollocationStates * k + j; }
  Eigen::Index ui(int k, int j) const { return kCollocationStates * p_.N + kCollocationControls * k + j; }

  double objective(const Eigen::VectorXd & z) const { return z(xi(p_.N - 1, 3)); }

  Eigen::VectorXd objective_gradient(const Eigen::VectorXd &) const
  {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars());
    g(xi(p_.N - 1, 3)) = 1.0;
    return g;
  }

  Eigen::VectorXd constraints(const Eigen::VectorXd & z) const
  {
    Eigen::VectorXd c(n_constraints());
    const double h = p_.h();
    for (int k = 0; k + 1 < p_.N; ++k) {
      const Node left  = node(z, k, k);
      const Node right = node(z, k + 1, k);
      for (int j = 0; j < kCollocationStates; ++j) {
        c(kCollocationStates * k + j) = z(xi(k + 1, j)) - z(xi(k, j)) - 0.5 * h * (left.f[j] + right.f[j]);
      }
    }
    Eigen::Index r = kCollocationStates * (p_.N - 1);
    c(r++)         = z(xi(0, 0)) - p_.x_hat.x1;
    c(r++)         = z(xi(0, 1)) - p_.x_hat.x2;
    c(r++)         = z(xi(0, 2)) - p_.x_hat.x3;
    c(r++)         = z(xi(p_.N - 1, 0)) - p_.x_star.x1;
    c(r++)         = z(xi(p_.N - 1, 1)) - p_.x_star.x2;
    c(r++)         = z(xi(p_.N - 1, 2)) - p_.x_star.x3;
    c(r++)         = z(xi(0, 3));
    c(r++)         = z(xi(0, 4));
    return c;
  }

  /// J(z)^T v without forming J.
  Eigen::VectorXd jacobian_transpose_times(const Eigen::VectorXd & z, const Eigen::VectorXd & v) const
  {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_vars());
    const double hh   = 0.5 * p_.h();
    for (int k = 0; k + 1 < p_.N; ++k) {
      const Node left  = node(z, k, k);
      const Node right = node(z, k + 1, k);
      for (int j = 0; j < kCollocationStates; ++j) {
        const double w = v(kCollocationStates * k + j);
        if (w == 0.0) { continue; }
        g(xi(k + 1, j)) += w;
        g(xi(k, j)) -= w;
        g(xi(k, 2)) -= hh * w * left.df_dx3[j];
        g(xi(k + 1, 2)) -= hh * w * right.df_dx3[j];
        g(ui(k, 0)) -= hh * w * (left.df_du[j][0] + right.df_du[j][0]);
        g(ui(k, 1)) -= hh * w * (left.df_du[j][1] + right.df_du[j][1]);
      }
    }
    Eigen::Index r = kCollocationStates * (p_.N - 1);
    g(xi(0, 0)) += v(r++);
    g(xi(0, 1)) += v(r++);
    g(xi(0, 2)) += v(r++);
    g(xi(p_.N - 1, 0)) += v(r++);
    g(xi(p_.N - 1, 1)) += v(r++);
    g(xi(p_.N - 1, 2)) += v(r++);
    g(xi(0, 3)) += v(r++);
    g(xi(0, 4)) += v(r++);
    return g;
  }

  /// Dense constraint Jacobian, for checks on small instances.
  Eigen::MatrixXd constraint_jacobian(const Eigen::VectorXd & z) const
  {
    Eigen::MatrixXd J(n_constraints(), n_vars());
    for (int i = 0; i < n_constraints(); ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n_constraints());
      e(i)              = 1.0;
      J.row(i)          = jacobian_transpose_times(z, e).transpose();
    }
    return J;
  }

  /// Integrand c1 u^T R u + c2 |||u|||_eps at a control value.
  double integrand(const ControlValue & u) const { return quadratic(u) + p_.cost.c2 * smoothed(u); }
  double quadratic(const ControlValue & u) const { return p_.cost.c1 * quad_form(u, p_.cost.R); }

private:
  struct Node
  {
    double f[kCollocationStates];
    double df_dx3[kCollocationStates];
    double df_du[kCollocationStates][2];
  };

  double smoothed(const ControlValue & u) const
  {
    if (p_.cost.norm_kind == NormKind::L1) {
      return smooth_norm({u.u1, 0.0}, p_.epsilon) + smooth_norm({u.u2, 0.0}, p_.epsilon);
    }
    return smooth_norm(u, p_.epsilon);
  }

  /// Dynamics and partials at node k under the control of interval `interval`.
  Node node(const Eigen::VectorXd & z, int k, int interval) const
  {
    const double x3 = z(xi(k, 2));
    const ControlValue u{z(ui(interval, 0)), z(ui(interval, 1))};
    const double c = std::cos(x3), s = std::sin(x3);
    const Eigen::Vector2d uv(u.u1, u.u2);
    const Eigen::Vector2d dq = 2.0 * p_.cost.c1 * (p_.cost.R * uv);
    Eigen::Vector2d dn;
    const double e2 = p_.epsilon * p_.epsilon;
    if (p_.cost.norm_kind == NormKind::L1) {
      dn = Eigen::Vector2d(u.u1 / std::sqrt(u.u1 * u.u1 + e2), u.u2 / std::sqrt(u.u2 * u.u2 + e2));
    } else {
      dn = uv / std::sqrt(uv.squaredNorm() + e2);
    }
    dn *= p_.cost.c2;

    Node n{};
    n.f[0]        = u.u1 * c;
    n.f[1]        = u.u1 * s;
    n.f[2]        = u.u2;
    n.f[4]        = quadratic(u);
    n.f[3]        = n.f[4] + p_.cost.c2 * smoothed(u);
    n.df_dx3[0]   = -u.u1 * s;
    n.df_dx3[1]   = u.u1 * c;
    n.df_du[0][0] = c;
    n.df_du[1][0] = s;
    n.df_du[2][1] = 1.0;
    n.df_du[3][0] = dq(0) + dn(0);
    n.df_du[3][1] = dq(1) + dn(1);
    n.df_du[4][0] = dq(0);
    n.df_du[4][1] = dq(1);
    return n;
  }

  CollocationProblem p_;
};

inline CollocationNlp transcribe(const CollocationProblem & p) { return CollocationNlp(p); }

struct CollocationSolution
{
  std::vector<double> times;
  Eigen::MatrixXd states;    ///< N x 5
  Eigen::MatrixXd controls;  ///< (N - 1) x 2, one row per interval
  double objective{0.0};
  double residual{0.0};      ///< infinity norm of the constraints
  double kkt_residual{0.0};  ///< infinity norm of grad f + J^T lambda
  int iterations{0};
  bool converged{false};
};

struct CollocationOptions
{
  double constraint_tol{1e-6};
  double gradient_tol{1e-6};
  int max_outer{40};
  int max_inner{4000};
  int restarts{5};
  std::uint64_t seed{0x5eed};
};

/**
 * Linear interpolation of (x1, x2, x3) between the boundary states and
 * constant controls equal to the time average of a turn-move-turn maneuver:
 * u1 = distance / T, u2 = heading change / T. x4 and x5 are the trapezoidal
 * integrals of the resulting integrand.
 */
inline Eigen::VectorXd initial_guess(const CollocationNlp & nlp)
{
  const auto & p = nlp.problem();
  Eigen::VectorXd z(nlp.n_vars());
  const double dist = std::hypot(p.x_star.x1 - p.x_hat.x1, p.x_star.x2 - p.x_hat.x2);
  const ControlValue u{dist / p.T, (p.x_star.x3 - p.x_hat.x3) / p.T};
  const double rate_full = nlp.integrand(u), rate_quad = nlp.quadratic(u);
  for (int k = 0; k < p.N; ++k) {
    const double s = static_cast<double>(k) / (p.N - 1);
    z(nlp.xi(k, 0)) = p.x_hat.x1 + s * (p.x_star.x1 - p.x_hat.x1);
    z(nlp.xi(k, 1)) = p.x_hat.x2 + s * (p.x_star.x2 - p.x_hat.x2);
    z(nlp.xi(k, 2)) = p.x_hat.x3 + s * (p.x_star.x3 - p.x_hat.x3);
    z(nlp.xi(k, 3)) = rate_full * s * p.T;
    z(nlp.xi(k, 4)) = rate_quad * s * p.T;
    if (k + 1 < p.N) {
      z(nlp.ui(k, 0)) = u.u1;
      z(nlp.ui(k, 1)) = u.u2;
    }
  }
  return z;
}

namespace detail {

inline CollocationSolution unpack(const CollocationNlp & nlp, const Eigen::VectorXd & z)
{
  const auto & p = nlp.problem();
  CollocationSolution s;
  s.states.resize(p.N, kCollocationStates);
  s.controls.resize(p.N - 1, kCollocationControls);
  for (int k = 0; k < p.N; ++k) {
    s.times.push_back(p.h() * k);
    for (int j = 0; j < kCollocationStates; ++j) { s.states(k, j) = z(nlp.xi(k, j)); }
    if (k + 1 < p.N) {
      for (int j = 0; j < kCollocationControls; ++j) { s.controls(k, j) = z(nlp.ui(k, j)); }
    }
  }
  s.objective = nlp.objective(z);
  return s;
}

inline CollocationSolution solve_from(const CollocationNlp & nlp, Eigen::VectorXd z, const CollocationOptions & opt)
{
  const int m        = nlp.n_constraints();
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(m);
  double mu          = 10.0;
  double c_prev      = std::numeric_limits<double>::infinity();
  int iterations     = 0;
  double c_norm = 0.0, kkt = 0.0;
  bool converged     = false;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    const auto lagrangian = [&](const Eigen::VectorXd & x, Eigen::VectorXd & g) {
      const Eigen::VectorXd c = nlp.constraints(x);
      g = nlp.objective_gradient(x) + nlp.jacobian_transpose_times(x, lam + mu * c);
      return nlp.objective(x) + lam.dot(c) + 0.5 * mu * c.squaredNorm();
    };
    const double inner_tol = std::max(0.1 * opt.gradient_tol, 1e-12);
    const auto r           = minimize_lbfgs(lagrangian, z, opt.max_inner, inner_tol, 20);
    z                      = r.x;
    iterations += r.iterations;

    const Eigen::VectorXd c = nlp.constraints(z);
    c_norm                  = c.lpNorm<Eigen::Infinity>();
    lam += mu * c;
    kkt = (nlp.objective_gradient(z) + nlp.jacobian_transpose_times(z, lam)).lpNorm<Eigen::Infinity>();
    if (c_norm <= opt.constraint_tol && kkt <= opt.gradient_tol) {
      converged = true;
      break;
    }
    if (c_norm > 0.25 * c_prev) { mu = std::min(mu * 10.0, 1e10); }
    c_prev = c_norm;
  }

  auto s         = unpack(nlp, z);
  s.residual     = c_norm;
  s.kkt_residual = kkt;
  s.iterations   = iterations;
  s.converged    = converged;
  return s;
}

}  // namespace detail

/**
 * @brief Augmented-Lagrangian solve of the transcribed problem with an L-BFGS inner loop.
 *
 * Starts from `start`; if that does not converge, up to `restarts` perturbed
 * copies are tried and the feasible result with the smallest objective (or
 * the least infeasible one) is returned.
 */
inline CollocationSolution solve_nlp(const CollocationNlp & nlp, const Eigen::VectorXd & start,
                                     const CollocationOptions & opt = {})
{
  auto best = detail::solve_from(nlp, start, opt);
  if (best.converged) { return best; }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double scale = std::max(1e-3, start.lpNorm<Eigen::Infinity>() * 1e-2);
  for (int r = 0; r < opt.restarts; ++r) {
    Eigen::VectorXd z = start;
    for (Eigen::Index i = 0; i < z.size(); ++i) { z(i) += scale * noise(rng); }
    auto s = detail::solve_from(nlp, z, opt);
    const bool better = (s.converged && (!best.converged || s.objective < best.objective)) ||
                        (!s.converged && !best.converged && s.residual < best.residual);
    if (better) { best = std::move(s); }
  }
  return best;
}

inline CollocationSolution solve_nlp(const CollocationNlp & nlp, const CollocationOptions & opt = {})
{
  return solve_nlp(nlp, initial_guess(nlp), opt);
}

}  // namespace trim_mpc
