#ifndef DYNKIN_SOLVER_SL_HPP
#define DYNKIN_SOLVER_SL_HPP

#include "dynkin/grids.hpp"
#include "dynkin/problem.hpp"
#include "dynkin/stepper.hpp"

namespace dynkin {

struct GridSet {
    TimeGrid time;
    SpaceGrid space;
    SimplexGrid simplex;
};

/// Per-level composition is fixed: expectation, then source, then obstacle
/// clamp, then convex envelope.
struct SolverConfig {
    GridSet grids;
    bool clamp_obstacles = false;
    bool convexify = false;
    bool source = false;
    std::span<const Shock> shocks = two_point_walk();

    // Store every k-th node per axis (grids stay the computation grids);
    // used for fine reference runs whose full tensor would not fit.
    int store_stride_t = 1;
    int store_stride_x = 1;
    int store_stride_p = 1;
};

/// Default configuration for a problem: clamp iff obstacles present,
/// convexify iff I >= 2, source iff the problem has one.
SolverConfig make_config(const ProblemSpec& problem, int time_steps,
                         int space_cells, int simplex_cells);

/// Backward semi-Lagrangian sweep. Throws on inconsistent grids or if a
/// non-finite value is produced (the message names the offending node).
SolutionField solve(const ProblemSpec& problem, const SolverConfig& config);

}  // namespace dynkin

#endif
