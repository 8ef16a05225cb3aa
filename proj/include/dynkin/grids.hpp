#ifndef DYNKIN_GRIDS_HPP
#define DYNKIN_GRIDS_HPP

#include <span>
#include <string>
#include <vector>

namespace dynkin {

/// Equidistant partition of [0, horizon] into `steps` intervals.
struct TimeGrid {
    int steps = 1;
    double horizon = 1.0;

    double dt() const { return horizon / steps; }
    double node(int n) const { return n == steps ? horizon : n * dt(); }
    int size() const { return steps + 1; }
};

/// Uniform mesh of [x_lo, x_hi] with `cells` line segments.
struct SpaceGrid {
    int cells = 1;
    double x_lo = 0.0;
    double x_hi = 1.0;

    double dx() const { return (x_hi - x_lo) / cells; }
    double node(int l) const { return l == cells ? x_hi : x_lo + l * dx(); }
    int size() const { return cells + 1; }
};

/// Nodes of a regular partition of the probability simplex over I scenarios.
/// Each node carries its full coordinate vector; for I=2 the nodes are the
/// uniform parametrization (p, 1-p) with p = m/M, and param() exposes the
/// scalar p directly.
struct SimplexGrid {
    int scenario_count = 1;
    int cells = 0;                       // M; 0 for I=1
    std::vector<std::vector<double>> nodes;

    static SimplexGrid uniform(int scenario_count, int cells);

    int size() const { return static_cast<int>(nodes.size()); }
    double dp() const { return cells > 0 ? 1.0 / cells : 0.0; }
    double param(int m) const { return nodes[m][0]; }
    std::span<const double> point(int m) const { return nodes[m]; }
};

/// Piecewise-linear interpolation of an x-slice; queries outside the grid
/// are clamped to the nearest endpoint. Throws on non-finite x.
double interp_x(std::span<const double> slice, const SpaceGrid& grid, double x);

class EnvelopeResult;

/// Dense nodal solution tensor u[n][l][m] over a (time, space, simplex)
/// grid triple, with interpolation accessors.
class SolutionField {
public:
    SolutionField() = default;
    SolutionField(TimeGrid t, SpaceGrid x, SimplexGrid p);

    const TimeGrid& time_grid() const { return time_; }
    const SpaceGrid& space_grid() const { return space_; }
    const SimplexGrid& simplex_grid() const { return simplex_; }

    int nt() const { return time_.size(); }
    int nx() const { return space_.size(); }
    int np() const { return simplex_.size(); }

    double& at(int n, int l, int m) { return values_[index(n, l, m)]; }
    double at(int n, int l, int m) const { return values_[index(n, l, m)]; }

    std::span<double> level(int n);
    std::span<const double> level(int n) const;
    // Contiguous simplex slice at one (n, l).
    std::span<const double> p_slice(int n, int l) const;

    /// Linear-in-time blend of the two enclosing levels at node (l, m).
    /// Throws if t is outside [0, T].
    double interp_t(double t, int l, int m) const;

    /// Full interpolation: simplex direction first (through the convexity
    /// preserving support of the stored level data), then space, then time.
    /// For I >= 2 the scalar p parametrizes (p, 1-p); requires I <= 2.
    double value_at(double t, double x, double p) const;

    void write_csv(const std::string& path) const;

    double min_value() const;
    double max_value() const;

    // Per-level regression residuals (NN scheme only; empty otherwise).
    std::vector<double>& residual_trace() { return residual_trace_; }
    const std::vector<double>& residual_trace() const { return residual_trace_; }

private:
    std::size_t index(int n, int l, int m) const {
        return (static_cast<std::size_t>(n) * nx() + l) * np() + m;
    }

    TimeGrid time_;
    SpaceGrid space_;
    SimplexGrid simplex_;
    std::vector<double> values_;
    std::vector<double> residual_trace_;
};

}  // namespace dynkin

#endif
