#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "collocation.hpp"
#include "costs.hpp"
#include "mpc.hpp"
#include "ocp.hpp"
#include "problem.hpp"
#include "trim_library.hpp"

namespace trim_mpc::io {

using nlohmann::json;

/// Malformed or invalid input. The message names the offending field or position.
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline const json & field(const json & j, const std::string & key, const std::string & path)
{
  if (!j.is_object()) { throw InputError(path + ": expected an object"); }
  const auto it = j.find(key);
  if (it == j.end()) { throw InputError(path + "." + key + ": missing field"); }
  return *it;
}

inline double number(const json & j, const std::string & path)
{
  if (!j.is_number()) { throw InputError(path + ": expected a number"); }
  const double v = j.get<double>();
  if (!std::isfinite(v)) { throw InputError(path + ": must be finite"); }
  return v;
}

inline int integer(const json & j, const std::string & path)
{
  if (!j.is_number_integer()) { throw InputError(path + ": expected an integer"); }
  return j.get<int>();
}

inline State state(const json & j, const std::string & path)
{
  if (!j.is_array() || j.size() != 3) { throw InputError(path + ": expected [x1, x2, x3]"); }
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

inline json state_json(const State & x) { return json::array({x.x1, x.x2, x.x3}); }

}  // namespace detail

inline json parse_json_text(const std::string & text, const std::string & source)
{
  try {
    return json::parse(text);
  } catch (const json::parse_error & e) {
    throw InputError(source + ": " + e.what());
  }
}

inline json read_json_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) { throw InputError(path + ": cannot open file"); }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

/// Pretty-printed JSON with a trailing newline. Doubles use the shortest
/// representation that reads back to the same value.
inline std::string dump(const json & j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error(path + ": cannot open for writing"); }
  out << text;
}

/// %.12g formatting for CSV cells.
inline std::string csv_number(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

// ---------------------------------------------------------------------------
// Library

inline json to_json(const TrimLibrary & lib)
{
  json arr = json::array();
  for (const auto & t : lib.trims()) { arr.push_back({{"id", t.id}, {"u1", t.u.u1}, {"u2", t.u.u2}, {"name", t.name}}); }
  return arr;
}

/// Parses without validating; call TrimLibrary::validate or construct to check invariants.
inline std::vector<TrimPrimitive> trims_from_json(const json & j, const std::string & path = "library")
{
  if (!j.is_array()) { throw InputError(path + ": expected an array of trims"); }
  std::vector<TrimPrimitive> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    TrimPrimitive t;
    t.id   = detail::integer(detail::field(j[i], "id", p), p + ".id");
    t.u.u1 = detail::number(detail::field(j[i], "u1", p), p + ".u1");
    t.u.u2 = detail::number(detail::field(j[i], "u2", p), p + ".u2");
    if (j[i].contains("name")) {
      if (!j[i]["name"].is_string()) { throw InputError(p + ".name: expected a string"); }
      t.name = j[i]["name"].get<std::string>();
    }
    out.push_back(std::move(t));
  }
  return out;
}

inline TrimLibrary library_from_json(const json & j, const std::string & path = "library")
{
  try {
    return TrimLibrary(trims_from_json(j, path));
  } catch (const std::invalid_argument & e) {
    throw InputError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Costs and problems

inline json to_json(const StageCost & c)
{
  return {{"c1", c.c1},
          {"R", json::array({json::array({c.R(0, 0), c.R(0, 1)}), json::array({c.R(1, 0), c.R(1, 1)})})},
          {"c2", c.c2},
          {"norm", std::string(to_string(c.norm_kind))},
          {"c3", c.c3}};
}

inline StageCost cost_from_json(const json & j, const std::string & path = "cost")
{
  if (!j.is_object()) { throw InputError(path + ": expected an object"); }
  StageCost c;
  if (j.contains("c1")) { c.c1 = detail::number(j["c1"], path + ".c1"); }
  if (j.contains("c2")) { c.c2 = detail::number(j["c2"], path + ".c2"); }
  if (j.contains("c3")) { c.c3 = detail::number(j["c3"], path + ".c3"); }
  if (j.contains("R")) {
    const auto & r = j["R"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_array() || !r[1].is_array() || r[0].size() != 2 || r[1].size() != 2) {
      throw InputError(path + ".R: expected a 2x2 array");
    }
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        c.R(a, b) = detail::number(r[a][b], path + ".R[" + std::to_string(a) + "][" + std::to_string(b) + "]");
      }
    }
  }
  if (j.contains("norm")) {
    if (!j["norm"].is_string()) { throw InputError(path + ".norm: expected \"L1\", \"L2\" or \"Linf\""); }
    try {
      c.norm_kind = norm_kind_from_string(j["norm"].get<std::string>());
    } catch (const std::invalid_argument & e) {
      throw InputError(path + ".norm: " + e.what());
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument & e) {
    throw InputError(path + ": " + e.what());
  }
  return c;
}

inline json to_json(const ControlSet & cs)
{
  if (const auto * g = std::get_if<GridControlSet>(&cs)) {
    return {{"grid", {{"du", g->du}, {"bound", json::array({g->bound.u1, g->bound.u2})}}}};
  }
  return {{"library", to_json(std::get<TrimLibrary>(cs))}};
}

inline ControlSet control_set_from_json(const json & j, const std::string & path = "control_set")
{
  if (j.is_string() && j.get<std::string>() == "default") { return default_library(); }
  if (!j.is_object()) { throw InputError(path + ": expected \"default\", {\"library\": [...]} or {\"grid\": {...}}"); }
  if (j.contains("library")) { return library_from_json(j["library"], path + ".library"); }
  if (j.contains("grid")) {
    const auto & g = j["grid"];
    GridControlSet grid;
    grid.du = detail::number(detail::field(g, "du", path + ".grid"), path + ".grid.du");
    if (g.contains("bound")) {
      const auto & b = g["bound"];
      if (!b.is_array() || b.size() != 2) { throw InputError(path + ".grid.bound: expected [u1max, u2max]"); }
      grid.bound = {detail::number(b[0], path + ".grid.bound[0]"), detail::number(b[1], path + ".grid.bound[1]")};
    }
    try {
      grid.validate();
    } catch (const std::invalid_argument & e) {
      throw InputError(path + ".grid: " + e.what());
    }
    return grid;
  }
  throw InputError(path + ": expected \"library\" or \"grid\"");
}

inline json to_json(const ProblemSpec & p)
{
  json j;
  j["x_hat"]        = detail::state_json(p.x_hat);
  j["x_star"]       = detail::state_json(p.x_star);
  j["horizon"]      = p.horizon ? json{{"fixed", *p.horizon}} : json("free");
  j["max_segments"] = p.max_segments;
  j["control_set"]  = to_json(p.control_set);
  if (p.state_box) {
    j["state_box"] = {{"lower", detail::state_json(p.state_box->lower)}, {"upper", detail::state_json(p.state_box->upper)}};
  }
  j["cost"] = to_json(p.cost);
  return j;
}

inline std::optional<double> horizon_from_json(const json & h)
{
  if (h.is_string()) {
    if (h.get<std::string>() == "free") { return std::nullopt; }
    throw InputError("horizon: expected {\"fixed\": T} or \"free\"");
  }
  return detail::number(detail::field(h, "fixed", "horizon"), "horizon.fixed");
}

inline ProblemSpec problem_from_json(const json & j)
{
  if (!j.is_object()) { throw InputError("problem: expected an object"); }
  ProblemSpec p;
  p.x_hat   = detail::state(detail::field(j, "x_hat", "problem"), "x_hat");
  p.x_star  = detail::state(detail::field(j, "x_star", "problem"), "x_star");
  p.horizon = horizon_from_json(detail::field(j, "horizon", "problem"));
  if (j.contains("max_segments")) { p.max_segments = detail::integer(j["max_segments"], "max_segments"); }
  if (j.contains("control_set")) { p.control_set = control_set_from_json(j["control_set"]); }
  if (j.contains("state_box") && !j["state_box"].is_null()) {
    const auto & b = j["state_box"];
    p.state_box    = StateBox{detail::state(detail::field(b, "lower", "state_box"), "state_box.lower"),
                           detail::state(detail::field(b, "upper", "state_box"), "state_box.upper")};
  }
  p.cost = cost_from_json(detail::field(j, "cost", "problem"));
  try {
    p.validate();
  } catch (const std::invalid_argument & e) {
    throw InputError(std::string("problem: ") + e.what());
  }
  return p;
}

inline ProblemSpec read_problem(const std::string & path) { return problem_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Solutions, trajectories, traces

inline json to_json(const TrimPlan & plan)
{
  json seq = json::array(), dur = json::array();
  for (const auto & s : plan.segments) {
    seq.push_back(s.id);
    dur.push_back(s.duration);
  }
  return {{"sequence", seq}, {"durations", dur}};
}

inline json to_json(const OcpSolution & s)
{
  json j            = to_json(s.plan);
  j["value"]        = s.value;
  j["t_star"]       = s.t_star;
  j["sequence_rank"] = s.sequence_rank;
  return j;
}

inline OcpSolution solution_from_json(const json & j)
{
  OcpSolution s;
  const auto & seq = detail::field(j, "sequence", "solution");
  const auto & dur = detail::field(j, "durations", "solution");
  if (!seq.is_array() || !dur.is_array() || seq.size() != dur.size()) {
    throw InputError("solution: sequence and durations must be arrays of equal length");
  }
  for (std::size_t i = 0; i < seq.size(); ++i) {
    s.plan.segments.push_back({detail::integer(seq[i], "sequence"), detail::number(dur[i], "durations")});
  }
  s.value  = detail::number(detail::field(j, "value", "solution"), "value");
  s.t_star = detail::number(detail::field(j, "t_star", "solution"), "t_star");
  if (j.contains("sequence_rank")) { s.sequence_rank = j["sequence_rank"].get<std::size_t>(); }
  return s;
}

/// CSV t,x1,x2,x3,u1,u2 of a plan sampled at spacing <= dt; rows at switching
/// instants carry the control of the segment that starts there.
inline std::string trajectory_csv(const TrimLibrary & lib, const TrimPlan & plan, const State & x0, double dt)
{
  std::string out = "t,x1,x2,x3,u1,u2\n";
  State x         = x0;
  double t        = 0.0;
  const auto row  = [&](double tt, const State & s, const ControlValue & u) {
    out += csv_number(tt) + "," + csv_number(s.x1) + "," + csv_number(s.x2) + "," + csv_number(s.x3) + "," +
           csv_number(u.u1) + "," + csv_number(u.u2) + "\n";
  };
  ControlValue last{};
  for (const auto & seg : plan.segments) {
    const ControlValue u = lib.at(seg.id).u;
    const auto xi        = xi_from(u, x);
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(seg.duration / dt - 1e-9)));
    for (std::size_t k = 0; k < n; ++k) {
      const double tau = seg.duration * static_cast<double>(k) / static_cast<double>(n);
      row(t + tau, act(exp(xi, tau), x), u);
    }
    x = act(exp(xi, seg.duration), x);
    t += seg.duration;
    last = u;
  }
  row(t, x, last);
  return out;
}

/// One row per MPC record: state at t_i, first applied control, V, closed-loop cost on [0, t_i), replanning flag.
inline std::string trace_csv(const TrimLibrary & lib, const MpcTrace & trace)
{
  std::string out = "t,x1,x2,x3,u1,u2,V,cost,replanned\n";
  double cum      = 0.0;
  for (const auto & s : trace.steps) {
    ControlValue u{};
    if (!s.terminal && !s.applied.segments.empty()) { u = lib.at(s.applied.segments.front().id).u; }
    out += csv_number(s.t) + "," + csv_number(s.state.x1) + "," + csv_number(s.state.x2) + "," +
           csv_number(s.state.x3) + "," + csv_number(u.u1) + "," + csv_number(u.u2) + "," + csv_number(s.value) + "," +
           csv_number(cum) + "," + (s.replanned ? "1" : "0") + "\n";
    cum += s.step_cost;
  }
  return out;
}

inline json summary_json(const MpcTrace & trace)
{
  json replans = json::array();
  json steps   = json::array();
  for (const auto & s : trace.steps) {
    if (s.replanned) { replans.push_back(s.t); }
    json rec = {{"t", s.t}, {"state", detail::state_json(s.state)}, {"V", s.value}, {"step_cost", s.step_cost},
                {"replanned", s.replanned}, {"terminal", s.terminal}};
    if (!s.terminal) { rec["plan"] = to_json(s.solution.plan); }
    steps.push_back(std::move(rec));
  }
  return {{"steps", trace.control_steps()},
          {"terminated", to_string(trace.terminated)},
          {"final_state", detail::state_json(trace.final_state)},
          {"closed_loop_cost", trace.closed_loop_cost},
          {"replanning_times", replans},
          {"records", steps}};
}

// ---------------------------------------------------------------------------
// Collocation

inline CollocationProblem collocation_problem_from_json(const json & j)
{
  if (!j.is_object()) { throw InputError("problem: expected an object"); }
  CollocationProblem p;
  p.x_hat  = detail::state(detail::field(j, "x_hat", "problem"), "x_hat");
  p.x_star = detail::state(detail::field(j, "x_star", "problem"), "x_star");
  const auto T = horizon_from_json(detail::field(j, "horizon", "problem"));
  if (!T) { throw InputError("horizon: the transcription needs a fixed horizon"); }
  p.T = *T;
  if (j.contains("N")) { p.N = detail::integer(j["N"], "N"); }
  if (j.contains("epsilon")) { p.epsilon = detail::number(j["epsilon"], "epsilon"); }
  p.cost = cost_from_json(detail::field(j, "cost", "problem"));
  try {
    p.validate();
  } catch (const std::invalid_argument & e) {
    throw InputError(std::string("problem: ") + e.what());
  }
  return p;
}

/// CSV t,x1..x5,u1,u2 per node; node k carries the control of interval k (the last node repeats the last interval).
inline std::string collocation_csv(const CollocationSolution & s)
{
  std::string out = "t,x1,x2,x3,x4,x5,u1,u2\n";
  const auto n    = static_cast<Eigen::Index>(s.times.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index c = std::min<Eigen::Index>(k, s.controls.rows() - 1);
    out += csv_number(s.times[static_cast<std::size_t>(k)]);
    for (int j = 0; j < 5; ++j) { out += "," + csv_number(s.states(k, j)); }
    out += "," + csv_number(s.controls(c, 0)) + "," + csv_number(s.controls(c, 1)) + "\n";
  }
  return out;
}

}  // namespace trim_mpc::io
