#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <trim_mpc/trim_mpc.hpp>

namespace {

using namespace trim_mpc;
using io::json;

constexpr const char * kVersion = "0.1.0";

enum Exit : int { ok = 0, input_error = 1, infeasible = 2, verification_failure = 3 };

constexpr const char * kFooter = R"(CSV columns:
  solve --trajectory   t,x1,x2,x3,u1,u2
  mpc --trace          t,x1,x2,x3,u1,u2,V,cost,replanned
                       (u = first applied control, V = optimal value at t,
                        cost = closed-loop cost accumulated on [0, t))
  transcribe --csv     t,x1,x2,x3,x4,x5,u1,u2
                       (node k carries the control held on interval k)
Exit codes: 0 ok, 1 input error, 2 infeasible or not converged, 3 verification failure.
TRIM_MPC_THREADS sets the default for --threads.)";

struct Globals
{
  unsigned threads{0};
  std::uint64_t seed{0x5eed};
  std::string manifest;
};

struct Manifest
{
  std::string command;
  std::string input;
  std::vector<std::string> outputs;
};

void emit(const std::string & path, const std::string & text, Manifest & m)
{
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  io::write_text(path, text);
  m.outputs.push_back(path);
}

ProblemSpec load_problem(const std::string & path)
{
  try {
    return io::read_problem(path);
  } catch (const io::InputError & e) {
    throw io::InputError(path + ": " + e.what());
  }
}

OcpOptions ocp_options(const Globals & g)
{
  OcpOptions o;
  o.threads = g.threads;
  o.seed    = g.seed;
  return o;
}

int cmd_solve(const Globals & g, const std::string & problem, const std::string & out, const std::string & traj,
              double dt, Manifest & m)
{
  const ProblemSpec p = load_problem(problem);
  OcpSolution s;
  try {
    s = solve(p, ocp_options(g));
  } catch (const InfeasibleProblem & e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return infeasible;
  }
  emit(out, io::dump(io::to_json(s)), m);
  if (!traj.empty()) { emit(traj, io::trajectory_csv(p.library(), s.plan, p.x_hat, dt), m); }
  return ok;
}

int cmd_mpc(const Globals & g, const std::string & problem, const MpcConfig & cfg, const std::string & trace_path,
            const std::string & summary_path, Manifest & m)
{
  const ProblemSpec p = load_problem(problem);
  try {
    cfg.validate();
  } catch (const std::invalid_argument & e) {
    throw io::InputError(e.what());
  }
  MpcTrace trace;
  try {
    trace = run(p, cfg, ocp_options(g));
  } catch (const InfeasibleProblem & e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return infeasible;
  }
  if (!trace_path.empty()) { emit(trace_path, io::trace_csv(p.library(), trace), m); }
  emit(summary_path, io::dump(io::summary_json(trace)), m);
  return ok;
}

int cmd_verify(const Globals & g, const std::string & suite, suites::Options opts, const std::string & out,
               Manifest & m)
{
  const auto & reg = suites::registry();
  const auto it    = reg.find(suite);
  if (it == reg.end()) {
    std::string names;
    for (const auto & [k, v] : reg) { names += (names.empty() ? "" : ", ") + k; }
    throw io::InputError("unknown suite '" + suite + "' (expected one of: " + names + ")");
  }
  opts.seed    = g.seed;
  opts.threads = g.threads;
  const auto report = it->second(opts);
  emit(out, io::dump(suites::to_json(report)), m);
  if (const auto * f = report.first_failure()) {
    std::cerr << "check failed: " << f->name << "\nwitness: " << json{{"worst", f->worst}, {"witness", f->witness}}.dump()
              << "\n";
    return verification_failure;
  }
  return ok;
}

int cmd_library(bool do_emit, const std::string & validate_path, const std::string & out, Manifest & m)
{
  if (do_emit) {
    emit(out, io::dump(io::to_json(default_library())), m);
    return ok;
  }
  const auto lib = io::library_from_json(io::read_json_file(validate_path), validate_path);
  std::cout << "valid: " << lib.size() << " trims\n";
  return ok;
}

int cmd_transcribe(const Globals & g, const std::string & problem, const std::string & out, const std::string & csv,
                   Manifest & m)
{
  CollocationProblem p;
  try {
    p = io::collocation_problem_from_json(io::read_json_file(problem));
  } catch (const io::InputError & e) {
    throw io::InputError(problem + ": " + e.what());
  }
  CollocationOptions opt;
  opt.seed       = g.seed;
  const auto sol = solve_nlp(transcribe(p), opt);
  const json summary{{"objective", sol.objective},     {"constraint_residual", sol.residual},
                     {"kkt_residual", sol.kkt_residual}, {"iterations", sol.iterations},
                     {"converged", sol.converged}};
  emit(out, io::dump(summary), m);
  if (!csv.empty()) { emit(csv, io::collocation_csv(sol), m); }
  if (!sol.converged) {
    std::cerr << "transcription did not converge (constraint residual " << sol.residual << ")\n";
    return infeasible;
  }
  return ok;
}

void write_manifest(const Globals & g, const Manifest & m, double wall)
{
  if (g.manifest.empty()) { return; }
  const json j{{"command", m.command}, {"input", m.input},          {"outputs", m.outputs},
               {"seed", g.seed},       {"version", kVersion},        {"wall_time_s", wall}};
  io::write_text(g.manifest, io::dump(j));
}

unsigned env_threads()
{
  const char * v = std::getenv("TRIM_MPC_THREADS");
  if (v == nullptr || *v == '\0') { return 0; }
  try {
    return static_cast<unsigned>(std::stoul(v));
  } catch (const std::exception &) {
    throw io::InputError(std::string("TRIM_MPC_THREADS: expected a non-negative integer, got '") + v + "'");
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Symmetry-exploiting MPC with trim primitives for the kinematic mobile robot"};
  app.footer(kFooter);
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Globals g;
  try {
    g.threads = env_threads();
  } catch (const io::InputError & e) {
    std::cerr << "error: " << e.what() << "\n";
    return input_error;
  }
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for multi-starts and randomized suites")->capture_default_str();
  app.add_option("--manifest", g.manifest, "Write a run manifest JSON here");

  std::string problem, out, traj;
  double dt = 0.01;
  auto * solve_cmd = app.add_subcommand("solve", "Solve the optimal control problem over trim sequences");
  solve_cmd->add_option("problem", problem, "Problem JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("-o,--output", out, "Solution JSON (default stdout)");
  solve_cmd->add_option("--trajectory", traj, "Trajectory CSV");
  solve_cmd->add_option("--dt", dt, "Trajectory sample spacing")->capture_default_str()->check(CLI::PositiveNumber);

  MpcConfig cfg;
  std::string trace_path;
  auto * mpc_cmd = app.add_subcommand("mpc", "Run the receding-horizon loop");
  mpc_cmd->add_option("problem", problem, "Problem JSON")->required()->check(CLI::ExistingFile);
  mpc_cmd->add_option("--delta", cfg.delta, "Sampling period")->capture_default_str();
  mpc_cmd->add_option("--max-steps", cfg.max_steps, "Step cap")->capture_default_str();
  mpc_cmd->add_option("--stop-tol", cfg.stop_tol, "Distance to the target that ends the loop")->capture_default_str();
  mpc_cmd->add_option("--trace", trace_path, "Trace CSV");
  mpc_cmd->add_option("-o,--summary", out, "Summary JSON (default stdout)");

  std::string suite;
  suites::Options vopts;
  std::vector<double> x_hat;
  auto * verify_cmd = app.add_subcommand("verify", "Run a property or oracle suite");
  verify_cmd->add_option("suite", suite, "equivariance, group, uniform-effort, lyapunov, simplified-value, rstar, transcription")
    ->required();
  verify_cmd->add_option("--samples", vopts.samples, "Random samples")->capture_default_str();
  verify_cmd->add_option("--x-hat", x_hat, "Initial state for simplified-value")->expected(3);
  verify_cmd->add_option("--horizon", vopts.T, "Horizon for simplified-value")->capture_default_str();
  verify_cmd->add_option("-o,--output", out, "Report JSON (default stdout)");

  bool do_emit = false;
  std::string validate_path;
  auto * lib_cmd = app.add_subcommand("library", "Emit or validate a trim library");
  auto * emit_opt = lib_cmd->add_flag("--emit", do_emit, "Write the default five-trim library");
  auto * val_opt  = lib_cmd->add_option("--validate", validate_path, "Check a library file")->check(CLI::ExistingFile);
  emit_opt->excludes(val_opt);
  lib_cmd->add_option("-o,--output", out, "Library JSON for --emit (default stdout)");

  std::string csv;
  auto * tr_cmd = app.add_subcommand("transcribe", "Solve the direct-transcription cross-check");
  tr_cmd->add_option("problem", problem, "Collocation problem JSON")->required()->check(CLI::ExistingFile);
  tr_cmd->add_option("-o,--output", out, "Summary JSON (default stdout)");
  tr_cmd->add_option("--csv", csv, "Node CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e) == 0 ? ok : input_error;
  }

  Manifest m;
  m.input      = problem.empty() ? validate_path : problem;
  const auto t0 = std::chrono::steady_clock::now();
  int rc        = ok;
  try {
    if (*solve_cmd) {
      m.command = "solve";
      rc        = cmd_solve(g, problem, out, traj, dt, m);
    } else if (*mpc_cmd) {
      m.command = "mpc";
      rc        = cmd_mpc(g, problem, cfg, trace_path, out, m);
    } else if (*verify_cmd) {
      m.command = "verify " + suite;
      if (!x_hat.empty()) { vopts.x_hat = {x_hat[0], x_hat[1], x_hat[2]}; }
      rc = cmd_verify(g, suite, vopts, out, m);
    } else if (*lib_cmd) {
      if (!do_emit && validate_path.empty()) { throw io::InputError("library: pass --emit or --validate FILE"); }
      m.command = do_emit ? "library --emit" : "library --validate";
      rc        = cmd_library(do_emit, validate_path, out, m);
    } else if (*tr_cmd) {
      m.command = "transcribe";
      rc        = cmd_transcribe(g, problem, out, csv, m);
    }
  } catch (const io::InputError & e) {
    std::cerr << "error: " << e.what() << "\n";
    return input_error;
  } catch (const std::invalid_argument & e) {
    std::cerr << "error: " << e.what() << "\n";
    return input_error;
  }
  write_manifest(g, m, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return rc;
}
