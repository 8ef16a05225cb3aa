#ifndef DYNKIN_ENVELOPE_HPP
#define DYNKIN_ENVELOPE_HPP

#include <span>
#include <utility>
#include <vector>

#include "dynkin/grids.hpp"

namespace dynkin {

/// Barycentric support of a point in the convexity-preserving partition:
/// at most I (node index, weight) pairs with nonnegative weights summing
/// to one whose nodes average back to the point.
struct SupportWeights {
    std::vector<std::pair<int, double>> terms;

    double combine(std::span<const double> values) const {
        double s = 0.0;
        for (const auto& [idx, w] : terms) s += w * values[idx];
        return s;
    }
};

/// Discrete lower convex envelope of nodal data on the simplex grid,
/// together with the per-node support realizing it.
class EnvelopeResult {
public:
    EnvelopeResult(const SimplexGrid& grid, std::vector<double> env,
                   std::vector<SupportWeights> support)
        : grid_(&grid), env_values_(std::move(env)), support_(std::move(support)) {}

    const SimplexGrid& grid() const { return *grid_; }
    std::span<const double> env_values() const { return env_values_; }
    const SupportWeights& support(int m) const { return support_[m]; }

private:
    const SimplexGrid* grid_;
    std::vector<double> env_values_;
    std::vector<SupportWeights> support_;
};

/// Envelope values only (no support bookkeeping); the fast path used inside
/// the backward sweep. `hull_scratch` avoids reallocation across calls.
/// For I=2 this is a monotone-chain lower hull over (p_m, value_m).
void lower_convex_envelope_values(const SimplexGrid& grid,
                                  std::span<const double> values,
                                  std::span<double> out,
                                  std::vector<int>& hull_scratch);

/// Full envelope with supports. Errors if the grid has fewer nodes than
/// scenarios or any value is non-finite. For I > 2 each node's envelope is
/// obtained from the linear program defining the discrete envelope.
EnvelopeResult lower_convex_envelope(const SimplexGrid& grid,
                                     std::span<const double> values);

/// Support of an arbitrary scalar-parametrized point p in [0,1] (I <= 2).
/// A point on a hull vertex gets that vertex with weight 1.
SupportWeights support_at(const EnvelopeResult& envelope, double p);

/// Support of a general simplex point, via the envelope linear program.
SupportWeights support_at(const EnvelopeResult& envelope, std::span<const double> p);

/// Convexity-preserving interpolation at p of the envelope's node values.
double interp_p(const EnvelopeResult& envelope, std::span<const double> level_values,
                double p);

struct FeedbackOutcome {
    int node;      // simplex grid node index
    double prob;
};

/// Law of the one-step belief jump: outcomes are simplex grid nodes.
struct FeedbackDistribution {
    std::vector<FeedbackOutcome> outcomes;

    /// Barycentric mean of the outcomes, component-wise.
    std::vector<double> mean(const SimplexGrid& grid) const;
};

/// Belief transition conditioned on scenario i (0-based): outcome pi_l of
/// the support of node m has probability (pi_l)_i * lambda_l / p_i; a point
/// mass at m when p_i = 0.
FeedbackDistribution feedback_distribution(const EnvelopeResult& envelope, int m, int i);

/// Scenario-marginal transition: mixture of the conditional laws with
/// weights p_i, which collapses to probability lambda_l on support node pi_l.
FeedbackDistribution feedback_marginal(const EnvelopeResult& envelope, int m);

/// Reference solution of the envelope LP at one point: minimize the convex
/// combination of `values` over barycentric weights reproducing p.
/// Returns the optimal value and fills `support` with the optimal basis.
double envelope_lp(const SimplexGrid& grid, std::span<const double> values,
                   std::span<const double> p, SupportWeights* support);

}  // namespace dynkin

#endif
