#ifndef DYNKIN_SOLVER_NN_HPP
#define DYNKIN_SOLVER_NN_HPP

#include <functional>
#include <memory>

#include "dynkin/neuralnet.hpp"
#include "dynkin/solver_sl.hpp"

namespace dynkin {

struct NNSolverConfig {
    SolverConfig base;
    // Per-level fits stop once every sample residual is below
    // min(target_max_resid, 8 dt^2): under the level's own truncation scale,
    // instead of polishing along the net's approximation floor. Setting the
    // field to 0 disables the absolute stop entirely.
    TrainConfig train{.target_max_resid = 1e-5};
    int hidden = 10;
    std::uint64_t seed = 0;
};

/// Fitted per-level regressor of one value slice, evaluable at arbitrary x
/// (in particular at the off-grid successor states).
class Regressor {
public:
    virtual ~Regressor() = default;
    virtual double eval(double x) const = 0;
};

/// Fits a regressor to the nodal slice {(x_l, y_l)} at level n, simplex node
/// m. The default factory trains a feedforward net (warm-started per m);
/// tests may substitute e.g. an exact interpolant.
using RegressorFactory = std::function<std::unique_ptr<Regressor>(
    std::span<const double> xs, std::span<const double> ys, int n, int m)>;

struct NNSolveResult {
    SolutionField field;
    // eps[n] = max over (l, m) of |regressor(x_l) - u[n+1][l][m]|.
    std::vector<double> residual_trace;
    // Fit diagnostics per (n, m), row-major over levels; empty for custom factories.
    struct FitRecord {
        int level, node, iterations;
        double mse, max_residual;
    };
    std::vector<FitRecord> fits;
};

/// Fully-discrete scheme: per level and simplex node, regress the value
/// slice, push the expectation through the regressor at the exact successor
/// states, clamp, then convexify. Throws if any fit diverges, naming (n, m).
NNSolveResult solve_nn(const ProblemSpec& problem, const NNSolverConfig& config,
                       RegressorFactory factory = {});

/// Regressor factory computing the piecewise-linear interpolant of the
/// samples; with it solve_nn reproduces the semi-Lagrangian scheme exactly.
RegressorFactory interpolant_oracle_factory(const SpaceGrid& grid);

void write_residual_csv(const std::string& path, std::span<const double> eps);
void write_fit_report_csv(const std::string& path,
                          std::span<const NNSolveResult::FitRecord> fits);

}  // namespace dynkin

#endif
