#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace trim_mpc::detail {

struct QnResult
{
  Eigen::VectorXd x;
  double f{0.0};
  double pg_norm{0.0};  ///< infinity norm of the projected gradient
  int iterations{0};
  bool converged{false};
};

/// Componentwise projection onto [lb, ub].
inline Eigen::VectorXd project(const Eigen::VectorXd & x, const Eigen::VectorXd & lb, const Eigen::VectorXd & ub)
{
  return x.cwiseMax(lb).cwiseMin(ub);
}

/// Norm of the projected gradient step P(x - g) - x.
inline double projected_gradient_norm(
  const Eigen::VectorXd & x, const Eigen::VectorXd & g, const Eigen::VectorXd & lb, const Eigen::VectorXd & ub)
{
  return (project(x - g, lb, ub) - x).lpNorm<Eigen::Infinity>();
}

/**
 * @brief Projected BFGS for small bound-constrained problems.
 *
 * fn(x, g) returns f(x) and writes the gradient to g. Variables sitting on a
 * bound with the gradient pointing outward are frozen for the step; the dense
 * inverse-Hessian approximation is reset whenever a step is not a descent
 * direction.
 */
template<typename Fn>
QnResult minimize_box_bfgs(
  Fn && fn, Eigen::VectorXd x, const Eigen::VectorXd & lb, const Eigen::VectorXd & ub, int max_iter, double tol)
{
  const Eigen::Index n = x.size();
  x                    = project(x, lb, ub);
  Eigen::VectorXd g(n);
  double f          = fn(x, g);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);

  QnResult res;
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it;
    const double pg = projected_gradient_norm(x, g, lb, ub);
    if (pg <= tol) {
      res.converged = true;
      break;
    }

    Eigen::Array<bool, Eigen::Dynamic, 1> active(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double span = 1e-12 * std::max(1.0, std::abs(x(i)));
      active(i)         = (x(i) <= lb(i) + span && g(i) > 0.0) || (x(i) >= ub(i) - span && g(i) < 0.0);
    }
    Eigen::VectorXd gf = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active(i)) { gf(i) = 0.0; }
    }
    Eigen::VectorXd d = -(H * gf);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active(i)) { d(i) = 0.0; }
    }
    if (d.dot(gf) >= 0.0) {
      H.setIdentity();
      d = -gf;
    }

    double step = 1.0;
    Eigen::VectorXd xn, gn(n);
    double fn_val = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn     = project(x + step * d, lb, ub);
      fn_val = fn(xn, gn);
      if (std::isfinite(fn_val) && fn_val <= f + 1e-4 * g.dot(xn - x)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (H.isIdentity()) { break; }
      H.setIdentity();
      continue;
    }

    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double sy         = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0) {
      const double rho      = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xn;
    g = gn;
    if (std::abs(f - fn_val) <= 1e-16 * std::max(1.0, std::abs(f)) && s.lpNorm<Eigen::Infinity>() < 1e-15) {
      f = fn_val;
      break;
    }
    f = fn_val;
  }
  res.x       = x;
  res.f       = f;
  res.pg_norm = projected_gradient_norm(x, g, lb, ub);
  if (res.pg_norm <= tol) { res.converged = true; }
  return res;
}

/**
 * @brief Limited-memory BFGS for smooth unconstrained problems.
 *
 * Backtracking Armijo line search; curvature pairs with s^T y <= 0 are skipped.
 */
template<typename Fn>
QnResult minimize_lbfgs(Fn && fn, Eigen::VectorXd x, int max_iter, double grad_tol, int memory = 12)
{
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  double f = fn(x, g);
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;

  QnResult res;
  int it = 0;
  for (; it < max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= grad_tol) {
      res.converged = true;
      break;
    }
    // two-loop recursion
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(q);
      q -= alpha[i] * Y[i];
    }
    double gamma = 1.0;
    if (!S.empty()) { gamma = S.back().dot(Y.back()) / Y.back().squaredNorm(); }
    Eigen::VectorXd d = gamma * q;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * Y[i].dot(d);
      d += S[i] * (alpha[i] - beta);
    }
    d = -d;
    double gd = g.dot(d);
    if (!(gd < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      d  = -g / std::max(1.0, g.norm());
      gd = g.dot(d);
    }

    double step = 1.0;
    Eigen::VectorXd xn, gn(n);
    double fnew   = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn   = x + step * d;
      fnew = fn(xn, gn);
      if (std::isfinite(fnew) && fnew <= f + 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (S.empty()) { break; }
      S.clear();
      Y.clear();
      rho.clear();
      continue;
    }
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double sy         = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm() && sy > 0.0) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x = xn;
    g = gn;
    f = fnew;
  }
  res.iterations = it;
  res.x          = x;
  res.f          = f;
  res.pg_norm    = g.lpNorm<Eigen::Infinity>();
  if (res.pg_norm <= grad_tol) { res.converged = true; }
  return res;
}

}  // namespace trim_mpc::detail
