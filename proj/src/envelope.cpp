#include "dynkin/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simplex_lp.hpp"

namespace dynkin {

namespace {

// Lower hull of (param(m), values[m]) by monotone chain; nodes on a chord
// are dropped, so hull vertices are strict kinks (deterministic supports).
void lower_hull_i2(const SimplexGrid& grid, std::span<const double> values,
                   std::vector<int>& hull) {
    const int M = grid.size();
    hull.clear();
    for (int m = 0; m < M; ++m) {
        double pm = grid.param(m), vm = values[m];
        while (hull.size() >= 2) {
            int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
            double pa = grid.param(a), va = values[a];
            double pb = grid.param(b), vb = values[b];
            double cross = (vb - va) * (pm - pa) - (vm - va) * (pb - pa);
            double scale = 1e-12 * (std::abs(va) + std::abs(vb) + std::abs(vm) + 1.0);
            if (cross >= -scale) hull.pop_back();  // b on or above chord a-m
            else break;
        }
        hull.push_back(m);
    }
}

void check_values(const SimplexGrid& grid, std::span<const double> values) {
    if (static_cast<int>(values.size()) != grid.size())
        throw std::invalid_argument("envelope: values do not match grid");
    if (grid.size() < grid.scenario_count)
        throw std::invalid_argument("envelope: fewer nodes than scenarios");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("envelope: non-finite value");
}

void envelope_from_hull(const SimplexGrid& grid, std::span<const double> values,
                        const std::vector<int>& hull, std::span<double> out) {
    int seg = 0;
    for (int m = 0; m < grid.size(); ++m) {
        while (seg + 1 < static_cast<int>(hull.size()) && hull[seg + 1] <= m) ++seg;
        if (hull[seg] == m || seg + 1 == static_cast<int>(hull.size())) {
            out[m] = values[hull[seg]];
            continue;
        }
        int a = hull[seg], b = hull[seg + 1];
        double w = (grid.param(m) - grid.param(a)) / (grid.param(b) - grid.param(a));
        out[m] = values[a] + w * (values[b] - values[a]);
    }
}

}  // namespace

void lower_convex_envelope_values(const SimplexGrid& grid,
                                  std::span<const double> values,
                                  std::span<double> out,
                                  std::vector<int>& hull_scratch) {
    check_values(grid, values);
    if (grid.scenario_count == 1) {
        out[0] = values[0];
        return;
    }
    if (grid.scenario_count == 2) {
        lower_hull_i2(grid, values, hull_scratch);
        envelope_from_hull(grid, values, hull_scratch, out);
        return;
    }
    for (int m = 0; m < grid.size(); ++m)
        out[m] = envelope_lp(grid, values, grid.point(m), nullptr);
}

EnvelopeResult lower_convex_envelope(const SimplexGrid& grid,
                                     std::span<const double> values) {
    check_values(grid, values);
    const int M = grid.size();
    std::vector<double> env(M);
    std::vector<SupportWeights> support(M);

    if (grid.scenario_count == 1) {
        env[0] = values[0];
        support[0].terms = {{0, 1.0}};
        return EnvelopeResult(grid, std::move(env), std::move(support));
    }
    if (grid.scenario_count == 2) {
        std::vector<int> hull;
        lower_hull_i2(grid, values, hull);
        envelope_from_hull(grid, values, hull, env);
        int seg = 0;
        for (int m = 0; m < M; ++m) {
            while (seg + 1 < static_cast<int>(hull.size()) && hull[seg + 1] <= m) ++seg;
            if (hull[seg] == m || seg + 1 == static_cast<int>(hull.size())) {
                support[m].terms = {{hull[seg], 1.0}};
                continue;
            }
            int a = hull[seg], b = hull[seg + 1];
            double w = (grid.param(m) - grid.param(a)) / (grid.param(b) - grid.param(a));
            support[m].terms = {{a, 1.0 - w}, {b, w}};
        }
        return EnvelopeResult(grid, std::move(env), std::move(support));
    }
    for (int m = 0; m < M; ++m)
        env[m] = envelope_lp(grid, values, grid.point(m), &support[m]);
    return EnvelopeResult(grid, std::move(env), std::move(support));
}

SupportWeights support_at(const EnvelopeResult& envelope, double p) {
    const SimplexGrid& grid = envelope.grid();
    if (grid.scenario_count == 1) return SupportWeights{{{0, 1.0}}};
    if (grid.scenario_count != 2)
        throw std::invalid_argument("support_at: scalar p requires I <= 2");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("support_at: p outside [0, 1]");

    // The envelope's hull vertices are exactly the nodes whose support is a
    // singleton on themselves; recover the vertex list from the supports.
    std::vector<int> hull;
    for (int m = 0; m < grid.size(); ++m) {
        const auto& t = envelope.support(m).terms;
        if (t.size() == 1 && t[0].first == m) hull.push_back(m);
    }
    // Locate the hull segment containing p.
    int seg = 0;
    while (seg + 1 < static_cast<int>(hull.size()) && grid.param(hull[seg + 1]) <= p)
        ++seg;
    int a = hull[seg];
    if (seg + 1 == static_cast<int>(hull.size()))
        return SupportWeights{{{a, 1.0}}};
    int b = hull[seg + 1];
    double w = (p - grid.param(a)) / (grid.param(b) - grid.param(a));
    if (w <= 1e-14) return SupportWeights{{{a, 1.0}}};
    if (w >= 1.0 - 1e-14) return SupportWeights{{{b, 1.0}}};
    return SupportWeights{{{a, 1.0 - w}, {b, w}}};
}

SupportWeights support_at(const EnvelopeResult& envelope, std::span<const double> p) {
    const SimplexGrid& grid = envelope.grid();
    if (static_cast<int>(p.size()) != grid.scenario_count)
        throw std::invalid_argument("support_at: wrong point dimension");
    if (grid.scenario_count <= 2) return support_at(envelope, p[0]);
    SupportWeights support;
    envelope_lp(grid, envelope.env_values(), p, &support);
    return support;
}

double interp_p(const EnvelopeResult& envelope, std::span<const double> level_values,
                double p) {
    return support_at(envelope, p).combine(level_values);
}

std::vector<double> FeedbackDistribution::mean(const SimplexGrid& grid) const {
    std::vector<double> mu(grid.scenario_count, 0.0);
    for (const auto& o : outcomes) {
        std::span<const double> pt = grid.point(o.node);
        for (int i = 0; i < grid.scenario_count; ++i) mu[i] += o.prob * pt[i];
    }
    return mu;
}

FeedbackDistribution feedback_distribution(const EnvelopeResult& envelope, int m, int i) {
    const SimplexGrid& grid = envelope.grid();
    if (i < 0 || i >= grid.scenario_count)
        throw std::invalid_argument("feedback: scenario index out of range");
    double pi = grid.point(m)[i];
    FeedbackDistribution dist;
    if (pi <= 0.0) {
        dist.outcomes = {{m, 1.0}};
        return dist;
    }
    for (const auto& [node, lambda] : envelope.support(m).terms) {
        double prob = grid.point(node)[i] * lambda / pi;
        if (prob > 0.0) dist.outcomes.push_back({node, prob});
    }
    return dist;
}

FeedbackDistribution feedback_marginal(const EnvelopeResult& envelope, int m) {
    FeedbackDistribution dist;
    for (const auto& [node, lambda] : envelope.support(m).terms)
        if (lambda > 0.0) dist.outcomes.push_back({node, lambda});
    return dist;
}

double envelope_lp(const SimplexGrid& grid, std::span<const double> values,
                   std::span<const double> p, SupportWeights* support) {
    const int M = grid.size();
    const int I = grid.scenario_count;
    // Coordinates sum to one, so one coordinate row is redundant: constrain
    // the weight sum and the first I-1 coordinates.
    Eigen::MatrixXd A(I, M);
    Eigen::VectorXd b(I), c(M);
    for (int m = 0; m < M; ++m) {
        A(0, m) = 1.0;
        for (int i = 0; i + 1 < I; ++i) A(i + 1, m) = grid.point(m)[i];
        c(m) = values[m];
    }
    b(0) = 1.0;
    for (int i = 0; i + 1 < I; ++i) b(i + 1) = p[i];

    detail::LpSolution sol = detail::solve_lp(A, b, c);
    if (!sol.feasible) throw std::runtime_error("envelope lp: point outside simplex");
    if (support) {
        support->terms.clear();
        for (int m = 0; m < M; ++m)
            if (sol.x[m] > 1e-14) support->terms.push_back({m, sol.x[m]});
        if (support->terms.empty()) support->terms.push_back({sol.basis.front(), 1.0});
    }
    return sol.value;
}

}  // namespace dynkin
