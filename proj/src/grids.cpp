#include "dynkin/grids.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "dynkin/envelope.hpp"

namespace dynkin {

SimplexGrid SimplexGrid::uniform(int scenario_count, int cells) {
    if (scenario_count < 1) throw std::invalid_argument("simplex grid: need I >= 1");
    SimplexGrid grid;
    grid.scenario_count = scenario_count;
    if (scenario_count == 1) {
        grid.cells = 0;
        grid.nodes = {{1.0}};
        return grid;
    }
    if (cells < 1) throw std::invalid_argument("simplex grid: need M >= 1");
    grid.cells = cells;
    if (scenario_count == 2) {
        grid.nodes.reserve(cells + 1);
        for (int m = 0; m <= cells; ++m) {
            double p = static_cast<double>(m) / cells;
            grid.nodes.push_back({p, 1.0 - p});
        }
        return grid;
    }
    // Lattice {k/M} over the simplex, lexicographic order.
    std::vector<int> k(scenario_count, 0);
    std::vector<double> coords(scenario_count);
    std::function<void(int, int)> rec = [&](int dim, int left) {
        if (dim == scenario_count - 1) {
            k[dim] = left;
            for (int i = 0; i < scenario_count; ++i)
                coords[i] = static_cast<double>(k[i]) / cells;
            grid.nodes.push_back(coords);
            return;
        }
        for (int v = 0; v <= left; ++v) {
            k[dim] = v;
            rec(dim + 1, left - v);
        }
    };
    rec(0, cells);
    return grid;
}

double interp_x(std::span<const double> slice, const SpaceGrid& grid, double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("interp_x: non-finite query");
    if (static_cast<int>(slice.size()) != grid.size())
        throw std::invalid_argument("interp_x: slice does not match grid");
    if (x <= grid.x_lo) return slice.front();
    if (x >= grid.x_hi) return slice.back();
    double s = (x - grid.x_lo) / grid.dx();
    int l = static_cast<int>(s);
    if (l >= grid.cells) l = grid.cells - 1;
    double w = s - l;
    return slice[l] + w * (slice[l + 1] - slice[l]);
}

SolutionField::SolutionField(TimeGrid t, SpaceGrid x, SimplexGrid p)
    : time_(t), space_(x), simplex_(std::move(p)) {
    values_.assign(static_cast<std::size_t>(nt()) * nx() * np(), 0.0);
}

std::span<double> SolutionField::level(int n) {
    return {values_.data() + index(n, 0, 0), static_cast<std::size_t>(nx()) * np()};
}

std::span<const double> SolutionField::level(int n) const {
    return {values_.data() + index(n, 0, 0), static_cast<std::size_t>(nx()) * np()};
}

std::span<const double> SolutionField::p_slice(int n, int l) const {
    return {values_.data() + index(n, l, 0), static_cast<std::size_t>(np())};
}

double SolutionField::interp_t(double t, int l, int m) const {
    const double T = time_.horizon;
    if (!(t >= 0.0 && t <= T)) throw std::invalid_argument("interp_t: t outside [0, T]");
    double s = t / time_.dt();
    int n = static_cast<int>(s);
    if (n >= time_.steps) return at(time_.steps, l, m);
    double w = s - n;
    return at(n, l, m) + w * (at(n + 1, l, m) - at(n, l, m));
}

namespace {

double eval_at_level(const SolutionField& field, int n, double x, double p) {
    const SpaceGrid& xg = field.space_grid();
    const SimplexGrid& pg = field.simplex_grid();
    double xc = std::min(std::max(x, xg.x_lo), xg.x_hi);
    double s = (xc - xg.x_lo) / xg.dx();
    int l = static_cast<int>(s);
    if (l >= xg.cells) l = xg.cells - 1;
    double w = s - l;

    auto value_at_node = [&](int li) {
        if (pg.size() == 1) return field.at(n, li, 0);
        EnvelopeResult env = lower_convex_envelope(pg, field.p_slice(n, li));
        SupportWeights sw = support_at(env, p);
        return sw.combine(env.env_values());
    };
    double u0 = value_at_node(l);
    double u1 = value_at_node(l + 1);
    return u0 + w * (u1 - u0);
}

}  // namespace

double SolutionField::value_at(double t, double x, double p) const {
    if (simplex_.scenario_count > 2)
        throw std::invalid_argument("value_at: scalar p requires I <= 2");
    if (simplex_.scenario_count == 2 && !(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("value_at: p outside [0, 1]");
    const double T = time_.horizon;
    if (!(t >= 0.0 && t <= T)) throw std::invalid_argument("value_at: t outside [0, T]");
    double s = t / time_.dt();
    int n = static_cast<int>(s);
    if (n >= time_.steps) return eval_at_level(*this, time_.steps, x, p);
    double w = s - n;
    double u0 = eval_at_level(*this, n, x, p);
    double u1 = eval_at_level(*this, n + 1, x, p);
    return u0 + w * (u1 - u0);
}

void SolutionField::write_csv(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fputs("t,x,p,u\n", fp);
    for (int n = 0; n < nt(); ++n) {
        double t = time_.node(n);
        for (int l = 0; l < nx(); ++l) {
            double x = space_.node(l);
            for (int m = 0; m < np(); ++m) {
                std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g\n", t, x,
                             simplex_.param(m), at(n, l, m));
            }
        }
    }
    std::fclose(fp);
}

double SolutionField::min_value() const {
    double v = values_.empty() ? 0.0 : values_.front();
    for (double u : values_) v = std::min(v, u);
    return v;
}

double SolutionField::max_value() const {
    double v = values_.empty() ? 0.0 : values_.front();
    for (double u : values_) v = std::max(v, u);
    return v;
}

}  // namespace dynkin
