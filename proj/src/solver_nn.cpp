#include "dynkin/solver_nn.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "dynkin/envelope.hpp"

namespace dynkin {

namespace {

class InterpolantRegressor : public Regressor {
public:
    InterpolantRegressor(SpaceGrid grid, std::vector<double> ys)
        : grid_(grid), ys_(std::move(ys)) {}
    double eval(double x) const override { return interp_x(ys_, grid_, x); }

private:
    SpaceGrid grid_;
    std::vector<double> ys_;
};

class NetRegressor : public Regressor {
public:
    explicit NetRegressor(const FeedforwardNet& net) : net_(net) {}
    double eval(double x) const override { return net_.forward(x); }

private:
    FeedforwardNet net_;
};

}  // namespace

RegressorFactory interpolant_oracle_factory(const SpaceGrid& grid) {
    return [grid](std::span<const double>, std::span<const double> ys, int,
                  int) -> std::unique_ptr<Regressor> {
        return std::make_unique<InterpolantRegressor>(
            grid, std::vector<double>(ys.begin(), ys.end()));
    };
}

NNSolveResult solve_nn(const ProblemSpec& problem, const NNSolverConfig& config,
                       RegressorFactory factory) {
    const SolverConfig& cfg = config.base;
    const TimeGrid& tg = cfg.grids.time;
    const SpaceGrid& xg = cfg.grids.space;
    const SimplexGrid& pg = cfg.grids.simplex;
    if (pg.scenario_count != problem.scenario_count)
        throw std::invalid_argument("solve_nn: simplex grid scenario count mismatch");
    if (cfg.store_stride_t != 1 || cfg.store_stride_x != 1 || cfg.store_stride_p != 1)
        throw std::invalid_argument("solve_nn: strided storage not supported");

    const int nx = xg.size();
    const int np = pg.size();
    const int I = pg.scenario_count;
    const double dt = tg.dt();

    NNSolveResult result;
    result.field = SolutionField(tg, xg, pg);
    SolutionField& u = result.field;
    result.residual_trace.assign(tg.steps, 0.0);

    std::vector<double> xs(nx);
    for (int l = 0; l < nx; ++l) xs[l] = xg.node(l);

    // Terminal level u = p . g.
    {
        std::vector<double> g(I);
        for (int l = 0; l < nx; ++l) {
            problem.eval_terminal(xs[l], g);
            for (int m = 0; m < np; ++m) {
                double v = 0.0;
                std::span<const double> p = pg.point(m);
                for (int i = 0; i < I; ++i) v += p[i] * g[i];
                u.at(tg.steps, l, m) = v;
            }
        }
    }

    // Fit residuals only need to sit below the level truncation scale; see
    // NNSolverConfig. A zero knob keeps the absolute stop disabled.
    TrainConfig train = config.train;
    if (train.target_max_resid > 0.0)
        train.target_max_resid = std::min(train.target_max_resid, 8.0 * dt * dt);

    // Default backend: one net per simplex node, warm-started down the levels.
    std::vector<FeedforwardNet> nets;
    const bool default_backend = !factory;
    if (default_backend) {
        nets.reserve(np);
        for (int m = 0; m < np; ++m)
            nets.push_back(make_mlp(config.hidden, Activation::Tanh,
                                    mix_seed(config.seed, 0, m)));
    }

    std::vector<double> slice(nx), f(I), h(I), env(np), vals(np);
    std::vector<int> hull;
    std::vector<std::unique_ptr<Regressor>> regs(np);

    for (int n = tg.steps - 1; n >= 0; --n) {
        const double t = tg.node(n);

        // Regress the level-(n+1) slice at each simplex node.
        double eps = 0.0;
        for (int m = 0; m < np; ++m) {
            for (int l = 0; l < nx; ++l) slice[l] = u.at(n + 1, l, m);
            if (default_backend) {
                TrainReport rep;
                try {
                    rep = fit(nets[m], xs, slice, train);
                } catch (const TrainingDiverged&) {
                    // One cold restart from a fresh seed before giving up.
                    nets[m] = make_mlp(config.hidden, Activation::Tanh,
                                       mix_seed(config.seed, n + 1, m));
                    try {
                        rep = fit(nets[m], xs, slice, train);
                    } catch (const TrainingDiverged&) {
                        throw std::runtime_error(
                            "solve_nn: training diverged at (n=" + std::to_string(n) +
                            ", m=" + std::to_string(m) + ")");
                    }
                }
                result.fits.push_back({n, m, rep.iterations, rep.mse, rep.max_residual});
                regs[m] = std::make_unique<NetRegressor>(nets[m]);
            } else {
                regs[m] = factory(xs, slice, n, m);
            }
            for (int l = 0; l < nx; ++l)
                eps = std::max(eps, std::abs(regs[m]->eval(xs[l]) - slice[l]));
        }
        result.residual_trace[n] = eps;

        for (int l = 0; l < nx; ++l) {
            const double x = xs[l];
            const double b = problem.drift(t, x);
            const double a = problem.diffusion(t, x);

            for (int m = 0; m < np; ++m) {
                double e = 0.0;
                for (const Shock& s : cfg.shocks) {
                    double xsucc = x + b * dt + a * std::sqrt(dt) * s.value;
                    e += s.prob * regs[m]->eval(xsucc);
                }
                if (cfg.source) e += dt * problem.source(t, x, pg.point(m));
                vals[m] = e;
            }

            if (cfg.clamp_obstacles) {
                if (problem.has_lower()) problem.eval_lower(t, x, f);
                if (problem.has_upper()) problem.eval_upper(t, x, h);
                for (int m = 0; m < np; ++m) {
                    std::span<const double> p = pg.point(m);
                    if (problem.has_lower()) {
                        double pf = 0.0;
                        for (int i = 0; i < I; ++i) pf += p[i] * f[i];
                        vals[m] = std::max(vals[m], pf);
                    }
                    if (problem.has_upper()) {
                        double ph = 0.0;
                        for (int i = 0; i < I; ++i) ph += p[i] * h[i];
                        vals[m] = std::min(vals[m], ph);
                    }
                }
            }

            if (cfg.convexify && np > 1) {
                lower_convex_envelope_values(pg, vals, env, hull);
                for (int m = 0; m < np; ++m) vals[m] = env[m];
            }

            for (int m = 0; m < np; ++m) {
                if (!std::isfinite(vals[m]))
                    throw std::runtime_error("solve_nn: non-finite value at (n=" +
                                             std::to_string(n) + ", l=" +
                                             std::to_string(l) + ", m=" +
                                             std::to_string(m) + ")");
                u.at(n, l, m) = vals[m];
            }
        }
    }
    u.residual_trace() = result.residual_trace;
    return result;
}

void write_residual_csv(const std::string& path, std::span<const double> eps) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fputs("n,eps\n", fp);
    for (std::size_t n = 0; n < eps.size(); ++n)
        std::fprintf(fp, "%zu,%.17g\n", n, eps[n]);
    std::fclose(fp);
}

void write_fit_report_csv(const std::string& path,
                          std::span<const NNSolveResult::FitRecord> fits) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("cannot open " + path);
    std::fputs("n,m,iterations,mse,max_residual\n", fp);
    for (const auto& r : fits)
        std::fprintf(fp, "%d,%d,%d,%.17g,%.17g\n", r.level, r.node, r.iterations,
                     r.mse, r.max_residual);
    std::fclose(fp);
}

}  // namespace dynkin
