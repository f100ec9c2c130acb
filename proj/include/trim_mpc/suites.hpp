#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "collocation.hpp"
#include "io.hpp"
#include "mpc.hpp"
#include "robot_model.hpp"
#include "scenarios.hpp"
#include "symmetry.hpp"
#include "verification.hpp"

namespace trim_mpc::suites {

using io::json;

struct Check
{
  std::string name;
  bool pass{true};
  double worst{0.0};  ///< worst observed quantity (residual, margin, ...)
  json witness;       ///< input that produced `worst`
};

struct Report
{
  std::string suite;
  std::vector<Check> checks;

  bool pass() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const auto & c) { return c.pass; });
  }
  const Check * first_failure() const
  {
    for (const auto & c : checks) {
      if (!c.pass) { return &c; }
    }
    return nullptr;
  }
};

inline json to_json(const Report & r)
{
  json checks = json::array();
  for (const auto & c : r.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"worst", c.worst}, {"witness", c.witness}});
  }
  return {{"suite", r.suite}, {"pass", r.pass()}, {"checks", checks}};
}

struct Options
{
  int samples{1000};
  std::uint64_t seed{0x5eed};
  State x_hat{3.0, 4.0, 0.0};  ///< simplified-value suite
  double T{1.0};               ///< simplified-value suite
  unsigned threads{0};
};

namespace detail {

inline json state_json(const State & x) { return json::array({x.x1, x.x2, x.x3}); }

inline json control_json(const PiecewiseControl & pc)
{
  json a = json::array();
  for (const auto & s : pc.segments) { a.push_back({s.u.u1, s.u.u2, s.duration}); }
  return a;
}

/// Tracks the largest value seen and the witness that produced it.
struct Worst
{
  double value{0.0};
  json witness;
  void update(double v, const std::function<json()> & w)
  {
    if (v > value || witness.is_null()) {
      value   = v;
      witness = w();
    }
  }
};

struct Sampler
{
  std::mt19937_64 rng;
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
  State state() { return {uniform(-5, 5), uniform(-5, 5), uniform(-10, 10)}; }
  GroupElement group() { return {uniform(-5, 5), uniform(-5, 5), uniform(-10, 10)}; }
  ControlValue control() { return {uniform(-2, 2), uniform(-2, 2)}; }
  PiecewiseControl piecewise(double max_total)
  {
    PiecewiseControl pc;
    const int n = integer(1, 4);
    for (int i = 0; i < n; ++i) { pc.segments.push_back({control(), uniform(0.0, max_total / n)}); }
    return pc;
  }
};

}  // namespace detail

/// Flow/action commutation, exp-versus-flow agreement and the RK4 oracle.
inline Report equivariance(const Options & o)
{
  Report r{"equivariance", {}};
  detail::Sampler s(o.seed);
  detail::Worst eq, ex, rk;
  for (int i = 0; i < o.samples; ++i) {
    const auto g  = s.group();
    const auto x0 = s.state();
    const auto pc = s.piecewise(10.0);
    const double t = s.uniform(0.0, pc.total_duration());
    eq.update(equivariance_residual(g, x0, pc, t), [&] {
      return json{{"g", {g.dx1(), g.dx2(), g.dx3()}}, {"x0", detail::state_json(x0)}, {"u", detail::control_json(pc)}, {"t", t}};
    });
    const auto u   = s.control();
    const double d = s.uniform(0.0, 10.0);
    ex.update(raw_distance(act(exp(xi_from(u, x0), d), x0), flow_const(x0, u, d)), [&] {
      return json{{"x0", detail::state_json(x0)}, {"u", {u.u1, u.u2}}, {"t", d}};
    });
    if (i < std::max(1, o.samples / 10)) {
      const auto traj = integrate(x0, pc, 1e-3);
      rk.update(raw_distance(traj.back().x, flow_piecewise(x0, pc, pc.total_duration())), [&] {
        return json{{"x0", detail::state_json(x0)}, {"u", detail::control_json(pc)}};
      });
    }
  }
  r.checks.push_back({"flow commutes with the action", eq.value <= 1e-10, eq.value, eq.witness});
  r.checks.push_back({"exp map reproduces the constant-control flow", ex.value <= 1e-10, ex.value, ex.witness});
  r.checks.push_back({"closed form agrees with RK4 at step 1e-3", rk.value <= 1e-8, rk.value, rk.witness});
  return r;
}

/// Group axioms, one-parameter subgroup, and small-rate branch consistency.
inline Report group(const Options & o)
{
  Report r{"group", {}};
  detail::Sampler s(o.seed);
  const auto dist = [](const GroupElement & a, const GroupElement & b) {
    return std::hypot(a.dx1() - b.dx1(), a.dx2() - b.dx2(), a.dx3() - b.dx3());
  };
  const auto gj = [](const GroupElement & g) { return json{g.dx1(), g.dx2(), g.dx3()}; };
  detail::Worst assoc, ident, inv, oneparam, action;
  for (int i = 0; i < o.samples; ++i) {
    const auto a = s.group(), b = s.group(), c = s.group();
    assoc.update(dist(compose(compose(a, b), c), compose(a, compose(b, c))), [&] { return json{gj(a), gj(b), gj(c)}; });
    ident.update(std::max(dist(compose(GroupElement::identity(), a), a), dist(compose(a, GroupElement::identity()), a)),
                 [&] { return gj(a); });
    inv.update(std::max(dist(compose(a, inverse(a)), GroupElement::identity()),
                        dist(compose(inverse(a), a), GroupElement::identity())),
               [&] { return gj(a); });
    const AlgebraElement xi{s.uniform(-2, 2), s.uniform(-2, 2), s.uniform(-2, 2)};
    const double t1 = s.uniform(-10, 10), t2 = s.uniform(-10, 10);
    oneparam.update(dist(exp(xi, t1 + t2), compose(exp(xi, t1), exp(xi, t2))),
                    [&] { return json{{"xi", {xi.v1, xi.v2, xi.omega}}, {"s", t1}, {"t", t2}}; });
    const auto x = s.state();
    action.update(raw_distance(act(compose(a, b), x), act(a, act(b, x))), [&] { return json{gj(a), gj(b)}; });
  }
  r.checks.push_back({"associativity", assoc.value <= 1e-12 * 100, assoc.value, assoc.witness});
  r.checks.push_back({"identity", ident.value <= 1e-12, ident.value, ident.witness});
  r.checks.push_back({"inverse", inv.value <= 1e-12 * 100, inv.value, inv.witness});
  r.checks.push_back({"one-parameter subgroup", oneparam.value <= 1e-12 * 100, oneparam.value, oneparam.witness});
  r.checks.push_back({"action compatibility", action.value <= 1e-12 * 100, action.value, action.witness});

  // series versus closed form just above the switch, and closed form evaluated in long double
  detail::Worst branch;
  for (double w : {1e-7, 1e-9, 1e-13}) {
    for (int i = 0; i < 20; ++i) {
      const AlgebraElement xi{s.uniform(-2, 2), s.uniform(-2, 2), (i % 2 ? -w : w)};
      const double t     = s.uniform(-10, 10);
      const auto g       = exp(xi, t);
      const long double th = static_cast<long double>(xi.omega) * t;
      const long double so = std::sin(th) / xi.omega;
      const long double oc = 2.0L * std::sin(th / 2) * std::sin(th / 2) / xi.omega;
      const double ex1     = static_cast<double>(xi.v1 * so - xi.v2 * oc);
      const double ex2     = static_cast<double>(xi.v1 * oc + xi.v2 * so);
      branch.update(std::hypot(g.dx1() - ex1, g.dx2() - ex2),
                    [&] { return json{{"xi", {xi.v1, xi.v2, xi.omega}}, {"t", t}}; });
    }
  }
  r.checks.push_back({"small-rate branch agrees with the closed form", branch.value <= 1e-10, branch.value, branch.witness});
  return r;
}

/// Strict improvement of non-uniform two-segment controls, plus the hand case.
inline Report uniform_effort(const Options & o)
{
  Report r{"uniform-effort", {}};
  detail::Sampler s(o.seed);
  int failures = 0;
  detail::Worst resid;
  json first_fail;
  const int n = std::min(o.samples, 500);
  for (int i = 0; i < n; ++i) {
    StageCost cost;
    cost.c1 = s.uniform(0.1, 2.0);
    cost.c2 = s.uniform(0.0, 1.0);
    const double a = s.uniform(0.5, 3.0), b = s.uniform(0.5, 3.0), c = s.uniform(-0.4, 0.4) * std::sqrt(a * b);
    cost.R << a, c, c, b;
    ControlSegment s1{s.control(), s.uniform(0.1, 3.0)}, s2{s.control(), s.uniform(0.1, 3.0)};
    const auto witness = [&] {
      return json{{"seg1", {s1.u.u1, s1.u.u2, s1.duration}}, {"seg2", {s2.u.u1, s2.u.u2, s2.duration}}};
    };
    if (std::abs(r_norm(s1.u, cost.R) - r_norm(s2.u, cost.R)) <= 1e-6) { continue; }
    const auto x0  = s.state();
    const auto res = improve_nonuniform(s1, s2, cost, x0);
    if (!res || !(res->new_cost < res->old_cost) || res->endpoint_residual > 1e-9) {
      ++failures;
      if (first_fail.is_null()) { first_fail = witness(); }
      continue;
    }
    resid.update(res->endpoint_residual, witness);
  }
  r.checks.push_back({"strict improvement on unequal norms", failures == 0, static_cast<double>(failures), first_fail});
  r.checks.push_back({"endpoint preserved", resid.value <= 1e-9, resid.value, resid.witness});

  StageCost unit;
  const auto hand = redistribute({{1.0, 0.0}, 1.0}, {{2.0, 0.0}, 1.0}, unit, 0.9);
  r.checks.push_back({"hand case alpha 0.9", std::abs(hand.new_cost - 4.725) <= 1e-12 && hand.old_cost == 5.0,
                      hand.new_cost, json{{"beta", hand.beta}, {"old_cost", hand.old_cost}}});
  return r;
}

/// Lyapunov decrease along the straight-line quantized MPC trace.
inline Report lyapunov(const Options & o)
{
  Report r{"lyapunov", {}};
  const auto p = scenarios::straight_line();
  OcpOptions opts;
  opts.threads      = o.threads;
  const auto trace  = run(p, MpcConfig{0.1, 1e-6, 100}, opts);
  const auto margin = lyapunov_margin(trace, p.cost.R, p.cost.c1, *p.horizon, 0.1);
  double worst      = 0.0;
  std::size_t at    = 0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    if (i == 0 || margin[i] < worst) {
      worst = margin[i];
      at    = i;
    }
  }
  r.checks.push_back({"margin >= -1e-6 on every step", worst >= -1e-6, worst, json{{"step", at}}});
  r.checks.push_back({"step 0 margin is 0.36", std::abs(margin.front() - 0.36) <= 5e-4, margin.front(), json{{"step", 0}}});
  return r;
}

/// Simplified-dynamics value function against the brute-force oracle.
inline Report simplified_value_suite(const Options & o)
{
  Report r{"simplified-value", {}};
  const double v     = simplified_value(o.x_hat, o.T);
  const double brute = simplified_bruteforce(o.x_hat, o.T, 4, 9);
  const double cand  = simplified_cost(simplified_constant_candidate(o.x_hat, o.T));
  const State e      = simplified_endpoint(o.x_hat, simplified_constant_candidate(o.x_hat, o.T));
  const json w       = {{"x_hat", detail::state_json(o.x_hat)}, {"T", o.T}, {"value", v}, {"bruteforce", brute}};
  r.checks.push_back({"oracle does not beat the value", brute >= v - 1e-3, v - brute, w});
  r.checks.push_back({"oracle within 1e-3 above the value", brute <= v + 1e-3, brute - v, w});
  r.checks.push_back({"constant control attains the value", std::abs(cand - v) <= 1e-12 && raw_distance(e, {}) <= 1e-12,
                      std::abs(cand - v), w});

  detail::Sampler s(o.seed);
  detail::Worst below, attain;
  for (int i = 0; i < 50; ++i) {
    const State x{s.uniform(-3, 3), s.uniform(-3, 3), s.uniform(-3, 3)};
    const double T  = s.uniform(0.5, 5.0);
    const double vv = simplified_value(x, T);
    const double bb = simplified_bruteforce(x, T, s.integer(1, 4), 7);
    below.update(vv - bb, [&] { return json{{"x_hat", detail::state_json(x)}, {"T", T}}; });
    attain.update(std::abs(simplified_cost(simplified_constant_candidate(x, T)) - vv),
                  [&] { return json{{"x_hat", detail::state_json(x)}, {"T", T}}; });
  }
  r.checks.push_back({"randomized: oracle never 1e-3 below", below.value <= 1e-3, below.value, below.witness});
  r.checks.push_back({"randomized: constant control attains", attain.value <= 1e-12, attain.value, attain.witness});
  return r;
}

/// r* for the unit weight and randomized SPD weights on [-2, 2]^2.
inline Report rstar(const Options & o)
{
  Report r{"rstar", {}};
  const ControlValue box{2.0, 2.0};
  const double unit = compute_rstar(Eigen::Matrix2d::Identity(), box);
  r.checks.push_back({"identity weight gives 4", unit == 4.0, unit, json{}});
  detail::Sampler s(o.seed);
  for (int i = 0; i < 3; ++i) {
    const double a = s.uniform(0.5, 5.0), b = s.uniform(0.5, 5.0), c = s.uniform(-0.9, 0.9) * std::sqrt(a * b);
    Eigen::Matrix2d R;
    R << a, c, c, b;
    const double rs    = compute_rstar(R, box);
    const double ratio = ellipse_box_ratio(R, rs * (1.0 - 1e-9), box);
    r.checks.push_back({"ellipse inside the box (" + std::to_string(i + 1) + ")", ratio <= 1.0, ratio,
                        json{{"R", {{a, c}, {c, b}}}, {"rstar", rs}}});
  }
  return r;
}

/// Least-squares R^2 of y against a straight line in t.
inline double linear_fit_r2(const std::vector<double> & t, const std::vector<double> & y)
{
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double icpt  = (sy - slope * st) / n;
  const double mean  = sy / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ss_res += std::pow(y[i] - (slope * t[i] + icpt), 2);
    ss_tot += std::pow(y[i] - mean, 2);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}

/// Relative spread (max - min) / max of c1 u^T R u over the collocation intervals.
inline double effort_spread(const CollocationSolution & s, const StageCost & cost)
{
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (Eigen::Index k = 0; k < s.controls.rows(); ++k) {
    const double q = cost.c1 * quad_form({s.controls(k, 0), s.controls(k, 1)}, cost.R);
    lo             = std::min(lo, q);
    hi             = std::max(hi, q);
  }
  return hi > 0.0 ? (hi - lo) / hi : 0.0;
}

/// The collocation example: objective, uniform effort, linear x5.
inline Report transcription(const Options &)
{
  Report r{"transcription", {}};
  const auto p   = scenarios::collocation_example();
  const auto sol = solve_nlp(transcribe(p));
  const json w   = {{"J", sol.objective}, {"residual", sol.residual}, {"iterations", sol.iterations}};
  r.checks.push_back({"converged", sol.converged, sol.residual, w});
  r.checks.push_back({"J within 2% of 0.5141", std::abs(sol.objective - 0.5141) <= 0.02 * 0.5141, sol.objective, w});
  const double spread = effort_spread(sol, p.cost);
  r.checks.push_back({"quadratic effort constant within 1%", spread <= 0.01, spread, w});
  std::vector<double> x5(sol.times.size());
  for (std::size_t k = 0; k < x5.size(); ++k) { x5[k] = sol.states(static_cast<Eigen::Index>(k), 4); }
  const double r2 = linear_fit_r2(sol.times, x5);
  r.checks.push_back({"x5 linear (R^2 >= 0.999)", r2 >= 0.999, r2, w});
  return r;
}

inline const std::map<std::string, std::function<Report(const Options &)>> & registry()
{
  static const std::map<std::string, std::function<Report(const Options &)>> r{
    {"equivariance", equivariance},     {"group", group},
    {"uniform-effort", uniform_effort}, {"lyapunov", lyapunov},
    {"simplified-value", simplified_value_suite}, {"rstar", rstar},
    {"transcription", transcription},
  };
  return r;
}

}  // namespace trim_mpc::suites
