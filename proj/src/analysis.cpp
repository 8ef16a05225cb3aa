#include "dynkin/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace dynkin {

namespace {

void accumulate(ErrorPair& e, double err, std::size_t& count, double& sq) {
    double a = std::abs(err);
    if (a > e.max_err) e.max_err = a;
    sq += a * a;
    ++count;
}

}  // namespace

ErrorPair errors_vs_exact(const SolutionField& field,
                          const std::function<double(double, double)>& exact) {
    if (!exact) throw std::invalid_argument("errors_vs_exact: missing reference");
    ErrorPair e;
    std::size_t count = 0;
    double sq = 0.0;
    for (int n = 0; n < field.nt(); ++n) {
        double t = field.time_grid().node(n);
        for (int l = 0; l < field.nx(); ++l) {
            double x = field.space_grid().node(l);
            double ref = exact(t, x);
            for (int m = 0; m < field.np(); ++m)
                accumulate(e, field.at(n, l, m) - ref, count, sq);
        }
    }
    e.rms_err = count ? std::sqrt(sq / count) : 0.0;
    return e;
}

ErrorPair errors_vs_field(const SolutionField& field, const SolutionField& reference) {
    const TimeGrid& tg = field.time_grid();
    const SpaceGrid& xg = field.space_grid();
    const SimplexGrid& pg = field.simplex_grid();
    const TimeGrid& tr = reference.time_grid();
    const SpaceGrid& xr = reference.space_grid();
    const SimplexGrid& pr = reference.simplex_grid();
    if (pg.scenario_count != pr.scenario_count)
        throw std::invalid_argument("errors_vs_field: scenario count mismatch");

    const bool coincident =
        tr.steps % tg.steps == 0 && xr.cells % xg.cells == 0 &&
        (pg.cells == 0 || (pr.cells > 0 && pr.cells % std::max(pg.cells, 1) == 0)) &&
        tr.horizon == tg.horizon && xr.x_lo == xg.x_lo && xr.x_hi == xg.x_hi;

    ErrorPair e;
    std::size_t count = 0;
    double sq = 0.0;
    if (coincident) {
        int kt = tr.steps / tg.steps;
        int kx = xr.cells / xg.cells;
        int kp = pg.cells > 0 ? pr.cells / pg.cells : 1;
        for (int n = 0; n < field.nt(); ++n)
            for (int l = 0; l < field.nx(); ++l)
                for (int m = 0; m < field.np(); ++m)
                    accumulate(e,
                               field.at(n, l, m) - reference.at(n * kt, l * kx, m * kp),
                               count, sq);
    } else {
        for (int n = 0; n < field.nt(); ++n) {
            double t = tg.node(n);
            for (int l = 0; l < field.nx(); ++l) {
                double x = xg.node(l);
                for (int m = 0; m < field.np(); ++m) {
                    double ref = reference.value_at(t, x, pg.param(m));
                    accumulate(e, field.at(n, l, m) - ref, count, sq);
                }
            }
        }
    }
    e.rms_err = count ? std::sqrt(sq / count) : 0.0;
    return e;
}

std::vector<ConvergenceRow> convergence_table(const std::vector<ConvergencePoint>& points) {
    std::vector<ConvergenceRow> rows;
    for (std::size_t k = 0; k < points.size(); ++k) {
        ConvergenceRow row{points[k].delta, points[k].max_err,
                           std::nan(""), points[k].rms_err, std::nan("")};
        if (k > 0) {
            double ratio = points[k - 1].delta / points[k].delta;
            if (std::abs(ratio - 2.0) > 1e-9)
                throw std::invalid_argument("convergence_table: deltas must halve");
            row.max_rate = std::log2(points[k - 1].max_err / points[k].max_err);
            row.rms_rate = std::log2(points[k - 1].rms_err / points[k].rms_err);
        }
        rows.push_back(row);
    }
    return rows;
}

void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fputs("delta,max_err,max_rate,rms_err,rms_rate\n", fp);
    for (const auto& r : rows) {
        if (std::isnan(r.max_rate))
            std::fprintf(fp, "%.17g,%.17g,,%.17g,\n", r.delta, r.max_err, r.rms_err);
        else
            std::fprintf(fp, "%.17g,%.17g,%.4f,%.17g,%.4f\n", r.delta, r.max_err,
                         r.max_rate, r.rms_err, r.rms_rate);
    }
    std::fclose(fp);
}

ActiveSetMask active_sets(const SolutionField& field, const ProblemSpec& problem,
                          int m_index, double tol) {
    if (m_index < 0 || m_index >= field.np())
        throw std::invalid_argument("active_sets: simplex index out of range");
    const int I = problem.scenario_count;
    ActiveSetMask mask;
    mask.nt = field.nt();
    mask.nx = field.nx();
    mask.tol = tol;
    mask.lower.assign(static_cast<std::size_t>(mask.nt) * mask.nx, 0);
    mask.upper.assign(static_cast<std::size_t>(mask.nt) * mask.nx, 0);
    std::span<const double> p = field.simplex_grid().point(m_index);
    std::vector<double> f(I), h(I);
    for (int n = 0; n < mask.nt; ++n) {
        double t = field.time_grid().node(n);
        for (int l = 0; l < mask.nx; ++l) {
            double x = field.space_grid().node(l);
            double u = field.at(n, l, m_index);
            std::size_t idx = static_cast<std::size_t>(n) * mask.nx + l;
            if (problem.has_lower()) {
                problem.eval_lower(t, x, f);
                double pf = 0.0;
                for (int i = 0; i < I; ++i) pf += p[i] * f[i];
                if (u - pf <= tol) mask.lower[idx] = 1;
            }
            if (problem.has_upper()) {
                problem.eval_upper(t, x, h);
                double ph = 0.0;
                for (int i = 0; i < I; ++i) ph += p[i] * h[i];
                if (ph - u <= tol) mask.upper[idx] = 1;
            }
        }
    }
    return mask;
}

void write_active_csv(const std::string& path, const ActiveSetMask& mask,
                      const SolutionField& field) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fputs("t,x,state\n", fp);
    for (int n = 0; n < mask.nt; ++n) {
        double t = field.time_grid().node(n);
        for (int l = 0; l < mask.nx; ++l) {
            double x = field.space_grid().node(l);
            const char* state = mask.is_upper(n, l)  ? "upper"
                                : mask.is_lower(n, l) ? "lower"
                                                      : "waiting";
            std::fprintf(fp, "%.17g,%.17g,%s\n", t, x, state);
        }
    }
    std::fclose(fp);
}

LipschitzReport regularity_constants(const SolutionField& field) {
    LipschitzReport rep;
    const double dx = field.space_grid().dx();
    for (int n = 0; n < field.nt(); ++n)
        for (int m = 0; m < field.np(); ++m)
            for (int l = 0; l + 1 < field.nx(); ++l)
                rep.lip_x = std::max(
                    rep.lip_x, std::abs(field.at(n, l + 1, m) - field.at(n, l, m)) / dx);

    const SimplexGrid& pg = field.simplex_grid();
    if (pg.size() > 1) {
        if (pg.scenario_count == 2) {
            const double dp = pg.dp();
            for (int n = 0; n < field.nt(); ++n)
                for (int l = 0; l < field.nx(); ++l)
                    for (int m = 0; m + 1 < field.np(); ++m)
                        rep.lip_p = std::max(
                            rep.lip_p,
                            std::abs(field.at(n, l, m + 1) - field.at(n, l, m)) / dp);
        } else {
            for (int n = 0; n < field.nt(); ++n)
                for (int l = 0; l < field.nx(); ++l)
                    for (int m1 = 0; m1 < field.np(); ++m1)
                        for (int m2 = m1 + 1; m2 < field.np(); ++m2) {
                            double d2 = 0.0;
                            for (int i = 0; i < pg.scenario_count; ++i) {
                                double d = pg.point(m1)[i] - pg.point(m2)[i];
                                d2 += d * d;
                            }
                            rep.lip_p = std::max(
                                rep.lip_p, std::abs(field.at(n, l, m1) -
                                                    field.at(n, l, m2)) /
                                               std::sqrt(d2));
                        }
        }
    }

    const double root_dt = std::sqrt(field.time_grid().dt());
    for (int n = 0; n + 1 < field.nt(); ++n)
        for (int l = 0; l < field.nx(); ++l)
            for (int m = 0; m < field.np(); ++m)
                rep.hol_t = std::max(
                    rep.hol_t,
                    std::abs(field.at(n + 1, l, m) - field.at(n, l, m)) / root_dt);
    return rep;
}

DataBounds sample_data_bounds(const ProblemSpec& problem, int x_samples) {
    const int I = problem.scenario_count;
    DataBounds b;
    std::vector<double> f(I), h(I), g(I), g_prev(I);
    auto norm = [&](const std::vector<double>& v) {
        double s = 0.0;
        for (double c : v) s += c * c;
        return std::sqrt(s);
    };
    const double T = problem.horizon;
    double dx = (problem.x_hi - problem.x_lo) / (x_samples - 1.0);
    for (int k = 0; k < x_samples; ++k) {
        double x = problem.x_lo + dx * k;
        problem.eval_terminal(x, g);
        b.sup_g = std::max(b.sup_g, norm(g));
        if (k > 0) {
            double d = 0.0;
            for (int i = 0; i < I; ++i) d += (g[i] - g_prev[i]) * (g[i] - g_prev[i]);
            b.lip_g = std::max(b.lip_g, std::sqrt(d) / dx);
        }
        g_prev = g;
        // Obstacles sampled at both endpoints of the time interval.
        for (double t : {0.0, T}) {
            if (problem.has_lower()) {
                problem.eval_lower(t, x, f);
                b.sup_f = std::max(b.sup_f, norm(f));
            }
            if (problem.has_upper()) {
                problem.eval_upper(t, x, h);
                b.sup_h = std::max(b.sup_h, norm(h));
            }
        }
    }
    return b;
}

}  // namespace dynkin
