#include "dynkin/solver_sl.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dynkin/envelope.hpp"

namespace dynkin {

SolverConfig make_config(const ProblemSpec& problem, int time_steps,
                         int space_cells, int simplex_cells) {
    SolverConfig cfg;
    cfg.grids.time = {time_steps, problem.horizon};
    cfg.grids.space = {space_cells, problem.x_lo, problem.x_hi};
    cfg.grids.simplex = SimplexGrid::uniform(problem.scenario_count, simplex_cells);
    cfg.clamp_obstacles = problem.has_lower() || problem.has_upper();
    cfg.convexify = problem.scenario_count >= 2;
    cfg.source = problem.has_source();
    return cfg;
}

namespace {

void validate(const ProblemSpec& problem, const SolverConfig& cfg) {
    if (cfg.grids.simplex.scenario_count != problem.scenario_count)
        throw std::invalid_argument("solve: simplex grid scenario count mismatch");
    if (cfg.grids.time.steps < 1 || cfg.grids.space.cells < 1)
        throw std::invalid_argument("solve: degenerate grid");
    if (cfg.grids.time.horizon != problem.horizon ||
        cfg.grids.space.x_lo != problem.x_lo || cfg.grids.space.x_hi != problem.x_hi)
        throw std::invalid_argument("solve: grid domain mismatch");
    if (cfg.store_stride_t < 1 || cfg.store_stride_x < 1 || cfg.store_stride_p < 1)
        throw std::invalid_argument("solve: strides must be positive");
    if (cfg.grids.time.steps % cfg.store_stride_t != 0 ||
        cfg.grids.space.cells % cfg.store_stride_x != 0)
        throw std::invalid_argument("solve: stride must divide the grid");
    if (cfg.store_stride_p > 1 && cfg.grids.simplex.scenario_count == 2 &&
        cfg.grids.simplex.cells % cfg.store_stride_p != 0)
        throw std::invalid_argument("solve: stride must divide the grid");
    if (cfg.store_stride_p > 1 && cfg.grids.simplex.scenario_count > 2)
        throw std::invalid_argument("solve: simplex stride requires I <= 2");
    if (cfg.source && !problem.has_source())
        throw std::invalid_argument("solve: source requested but absent");
    if (cfg.clamp_obstacles && !problem.has_lower() && !problem.has_upper())
        throw std::invalid_argument("solve: clamp requested without obstacles");
}

[[noreturn]] void abort_non_finite(int n, int l, int m) {
    throw std::runtime_error("solve: non-finite value at (n=" + std::to_string(n) +
                             ", l=" + std::to_string(l) + ", m=" + std::to_string(m) + ")");
}

}  // namespace

SolutionField solve(const ProblemSpec& problem, const SolverConfig& cfg) {
    validate(problem, cfg);

    const TimeGrid& tg = cfg.grids.time;
    const SpaceGrid& xg = cfg.grids.space;
    const SimplexGrid& pg = cfg.grids.simplex;
    const int nx = xg.size();
    const int np = pg.size();
    const int I = pg.scenario_count;
    const double dt = tg.dt();

    const int st = cfg.store_stride_t, sx = cfg.store_stride_x, sp = cfg.store_stride_p;
    TimeGrid tg_out{tg.steps / st, tg.horizon};
    SpaceGrid xg_out{xg.cells / sx, xg.x_lo, xg.x_hi};
    SimplexGrid pg_out = (sp == 1) ? pg : SimplexGrid::uniform(I, pg.cells / sp);
    SolutionField field(tg_out, xg_out, pg_out);

    std::vector<double> cur(static_cast<std::size_t>(nx) * np);
    std::vector<double> next(static_cast<std::size_t>(nx) * np);

    auto store_level = [&](int n, const std::vector<double>& level) {
        if (n % st != 0) return;
        int n_out = n / st;
        for (int l = 0; l <= xg_out.cells; ++l)
            for (int m = 0; m < pg_out.size(); ++m)
                field.at(n_out, l, m) =
                    level[static_cast<std::size_t>(l * sx) * np + m * sp];
    };

    // Terminal level: u = p . g, linear (hence convex) in p.
    {
        std::vector<double> g(I);
        for (int l = 0; l < nx; ++l) {
            problem.eval_terminal(xg.node(l), g);
            for (int m = 0; m < np; ++m) {
                double v = 0.0;
                std::span<const double> p = pg.point(m);
                for (int i = 0; i < I; ++i) v += p[i] * g[i];
                if (!std::isfinite(v)) abort_non_finite(tg.steps, l, m);
                next[static_cast<std::size_t>(l) * np + m] = v;
            }
        }
        store_level(tg.steps, next);
    }

    std::vector<double> f(I), h(I), env(np);
    std::vector<int> hull;
    struct Foot { int l0; double w, prob; };
    std::vector<Foot> feet;

    for (int n = tg.steps - 1; n >= 0; --n) {
        const double t = tg.node(n);
        for (int l = 0; l < nx; ++l) {
            const double x = xg.node(l);
            const double b = problem.drift(t, x);
            const double a = problem.diffusion(t, x);

            feet.clear();
            for (const Shock& s : cfg.shocks) {
                double xs = x + b * dt + a * std::sqrt(dt) * s.value;
                double u = (std::min(std::max(xs, xg.x_lo), xg.x_hi) - xg.x_lo) / xg.dx();
                int l0 = std::min(static_cast<int>(u), xg.cells - 1);
                feet.push_back({l0, u - l0, s.prob});
            }

            double* slot = cur.data() + static_cast<std::size_t>(l) * np;
            const double* prev = next.data();
            for (int m = 0; m < np; ++m) {
                double e = 0.0;
                for (const Foot& ft : feet) {
                    const double* base = prev + static_cast<std::size_t>(ft.l0) * np + m;
                    e += ft.prob * (base[0] + ft.w * (base[np] - base[0]));
                }
                slot[m] = e;
            }

            if (cfg.source) {
                for (int m = 0; m < np; ++m)
                    slot[m] += dt * problem.source(t, x, pg.point(m));
            }

            if (cfg.clamp_obstacles) {
                if (problem.has_lower()) problem.eval_lower(t, x, f);
                if (problem.has_upper()) problem.eval_upper(t, x, h);
                for (int m = 0; m < np; ++m) {
                    std::span<const double> p = pg.point(m);
                    if (problem.has_lower()) {
                        double pf = 0.0;
                        for (int i = 0; i < I; ++i) pf += p[i] * f[i];
                        slot[m] = std::max(slot[m], pf);
                    }
                    if (problem.has_upper()) {
                        double ph = 0.0;
                        for (int i = 0; i < I; ++i) ph += p[i] * h[i];
                        slot[m] = std::min(slot[m], ph);
                    }
                }
            }

            if (cfg.convexify && np > 1) {
                lower_convex_envelope_values(pg, {slot, static_cast<std::size_t>(np)},
                                             env, hull);
                for (int m = 0; m < np; ++m) slot[m] = env[m];
            }

            for (int m = 0; m < np; ++m)
                if (!std::isfinite(slot[m])) abort_non_finite(n, l, m);
        }
        store_level(n, cur);
        std::swap(cur, next);
    }
    return field;
}

}  // namespace dynkin
