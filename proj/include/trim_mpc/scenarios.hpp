#pragma once

#include <optional>

#include "collocation.hpp"
#include "costs.hpp"
#include "problem.hpp"
#include "trim_library.hpp"

namespace trim_mpc::scenarios {

/// Straight-line approach to the origin on the quantized grid {du * (j, k)} in [-2, 2]^2, T = 1, cost |u|^2.
inline ProblemSpec straight_line(double x1 = -2.0, double du = 0.1)
{
  ProblemSpec p;
  p.x_hat        = {x1, 0.0, 0.0};
  p.x_star       = {0.0, 0.0, 0.0};
  p.horizon      = 1.0;
  p.max_segments = 4;
  p.control_set  = GridControlSet{du, {2.0, 2.0}};
  p.cost         = StageCost{};
  return p;
}

/// Parallel parking (0, 1, 0) -> origin in T = 8 with the five-trim library and up to four segments.
inline ProblemSpec parking(double c2 = 0.5)
{
  ProblemSpec p;
  p.x_hat        = {0.0, 1.0, 0.0};
  p.x_star       = {0.0, 0.0, 0.0};
  p.horizon      = 8.0;
  p.max_segments = 4;
  p.control_set  = default_library();
  p.cost.c1      = 1.0;
  p.cost.c2      = c2;
  return p;
}

/// Parking with the pure time penalty c3 = 1 and free final time.
inline ProblemSpec parking_time_penalty()
{
  ProblemSpec p  = parking(0.0);
  p.horizon      = std::nullopt;
  p.cost.c1      = 0.0;
  p.cost.c2      = 0.0;
  p.cost.c3      = 1.0;
  return p;
}

/// Collocation example: (0.1, 1, 0.8) -> origin, T = 50, N = 50,
/// integrand 4 u1^2 + u2^2 - 3 u1 u2 + 0.1 |u|_2.
inline CollocationProblem collocation_example()
{
  CollocationProblem p;
  p.N      = 50;
  p.T      = 50.0;
  p.x_hat  = {0.1, 1.0, 0.8};
  p.x_star = {0.0, 0.0, 0.0};
  p.cost.c1 = 1.0;
  p.cost.R << 4.0, -1.5, -1.5, 1.0;
  p.cost.c2 = 0.1;
  return p;
}

}  // namespace trim_mpc::scenarios
