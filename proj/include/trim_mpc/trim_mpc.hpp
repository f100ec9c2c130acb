#pragma once

#include "symmetry.hpp"
#include "robot_model.hpp"
#include "costs.hpp"
#include "trim_library.hpp"
#include "problem.hpp"
#include "ocp.hpp"
#include "mpc.hpp"
#include "verification.hpp"
#include "collocation.hpp"
#include "io.hpp"
#include "scenarios.hpp"
#include "suites.hpp"
