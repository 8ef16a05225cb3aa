#ifndef DYNKIN_ANALYSIS_HPP
#define DYNKIN_ANALYSIS_HPP

#include <functional>
#include <string>
#include <vector>

#include "dynkin/grids.hpp"
#include "dynkin/problem.hpp"

namespace dynkin {

struct ErrorPair {
    double max_err = 0.0;
    double rms_err = 0.0;
};

/// Nodal errors against a closed-form reference u(t, x) (scenario-free
/// problems; the field may still carry a simplex axis).
ErrorPair errors_vs_exact(const SolutionField& field,
                          const std::function<double(double, double)>& exact);

/// Nodal errors against a finer grid field, evaluated through the reference
/// field's own interpolants. Node-coincident reference grids are read
/// directly.
ErrorPair errors_vs_field(const SolutionField& field, const SolutionField& reference);

struct ConvergenceRow {
    double delta;
    double max_err;
    double max_rate;  // NaN in the first row
    double rms_err;
    double rms_rate;
};

struct ConvergencePoint {
    double delta;
    double max_err;
    double rms_err;
};

/// Base-2 log error ratios down a halving sequence of deltas; throws if the
/// deltas do not halve.
std::vector<ConvergenceRow> convergence_table(const std::vector<ConvergencePoint>& points);

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows);

/// Obstacle contact masks at a fixed simplex node, indexed [n * nx + l].
struct ActiveSetMask {
    int nt = 0, nx = 0;
    double tol = 2e-5;
    std::vector<char> lower;
    std::vector<char> upper;

    bool is_lower(int n, int l) const { return lower[static_cast<std::size_t>(n) * nx + l] != 0; }
    bool is_upper(int n, int l) const { return upper[static_cast<std::size_t>(n) * nx + l] != 0; }
};

/// Nodes within `tol` of an obstacle at simplex node m_index.
ActiveSetMask active_sets(const SolutionField& field, const ProblemSpec& problem,
                          int m_index, double tol = 2e-5);

/// CSV rows `t,x,state` with state in {lower, upper, waiting}.
void write_active_csv(const std::string& path, const ActiveSetMask& mask,
                      const SolutionField& field);

struct LipschitzReport {
    double lip_x = 0.0;  // max |du| / dx over space neighbors
    double lip_p = 0.0;  // max |du| / dp over simplex neighbors
    double hol_t = 0.0;  // max |du| / (sqrt(dt) + sqrt(|s-t|)) over level pairs
};

LipschitzReport regularity_constants(const SolutionField& field);

/// Sampled sup-norms and Lipschitz constants of the problem data, Euclidean
/// over the scenario components; used for the regularity bounds.
struct DataBounds {
    double sup_f = 0.0, sup_h = 0.0, sup_g = 0.0;
    double lip_g = 0.0;
};
DataBounds sample_data_bounds(const ProblemSpec& problem, int x_samples = 513);

}  // namespace dynkin

#endif
