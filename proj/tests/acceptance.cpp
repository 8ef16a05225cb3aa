// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 1, 2 and 4 drive the CLI binary (path in DYNKIN_CLI) and
// read back its tables; the rest exercise the core library directly.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dynkin/analysis.hpp"
#include "dynkin/envelope.hpp"
#include "dynkin/neuralnet.hpp"
#include "dynkin/problem.hpp"
#include "dynkin/solver_nn.hpp"
#include "dynkin/solver_sl.hpp"
#include "dynkin/stepper.hpp"

using namespace dynkin;
using nlohmann::json;

namespace {

int g_failures = 0;
json g_manifest;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d %s: %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
    g_manifest["criteria"][std::to_string(criterion)] = {{"pass", pass},
                                                         {"detail", detail}};
    if (!pass) ++g_failures;
}

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---- CLI-driven tables ----------------------------------------------------

struct TableRow {
    double delta, max_err, max_rate, rms_err, rms_rate;
};

bool read_table(const std::string& path, std::vector<TableRow>& rows) {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    std::getline(in, line);  // header
    rows.clear();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> f;
        while (std::getline(ss, tok, ',')) f.push_back(tok);
        while (f.size() < 5) f.push_back("");
        TableRow r;
        r.delta = std::stod(f[0]);
        r.max_err = std::stod(f[1]);
        r.max_rate = f[2].empty() ? NAN : std::stod(f[2]);
        r.rms_err = std::stod(f[3]);
        r.rms_rate = f[4].empty() ? NAN : std::stod(f[4]);
        rows.push_back(r);
    }
    return !rows.empty();
}

const char* cli_path() {
    const char* p = std::getenv("DYNKIN_CLI");
    return p ? p : "";
}

bool run_cli(const std::string& args) {
    std::string cmd = std::string(cli_path()) + " " + args + " > /dev/null";
    return std::system(cmd.c_str()) == 0;
}

// Last three rates of both columns within [lo, hi].
bool rates_in_band(const std::vector<TableRow>& rows, double lo, double hi,
                   std::string& why) {
    if (rows.size() < 4) {
        why = "too few rows";
        return false;
    }
    for (std::size_t i = rows.size() - 3; i < rows.size(); ++i) {
        for (double r : {rows[i].max_rate, rows[i].rms_rate}) {
            if (!(r >= lo && r <= hi)) {
                why = fmt("rate %.4f at delta %.3e outside [%.2f, %.2f]", r,
                          rows[i].delta, lo, hi);
                return false;
            }
        }
    }
    return true;
}

void criterion1() {
    const std::string dir = "acceptance_out";
    double t0 = now_s();
    bool ok = run_cli("table --preset exp1 --scheme sl --axis t --out " + dir) &&
              run_cli("table --preset exp1 --scheme sl --axis x --out " + dir);
    double wall = now_s() - t0;
    std::vector<TableRow> tt, tx;
    ok = ok && read_table(dir + "/exp1_sl_t_table.csv", tt) &&
         read_table(dir + "/exp1_sl_x_table.csv", tx);
    if (!ok) {
        report(1, false, "table command failed");
        return;
    }
    std::string why;
    for (auto* rows : {&tt, &tx}) {
        if (!rates_in_band(*rows, 0.75, 1.30, why)) {
            report(1, false, why);
            return;
        }
        double c = rows->front().max_err;
        if (!(c >= 6.21e-2 / 2 && c <= 6.21e-2 * 2)) {
            report(1, false, fmt("coarsest MAX %.3e not within factor 2 of 6.21e-2", c));
            return;
        }
        if (std::abs(rows->front().delta - 1.5625e-2) > 1e-12 ||
            std::abs(rows->back().delta - 9.765625e-4) > 1e-12) {
            report(1, false, "delta range is not 1.56e-2 .. 9.77e-4");
            return;
        }
    }
    if (wall >= 60.0) {
        report(1, false, fmt("tables took %.1f s (>= 60 s)", wall));
        return;
    }
    report(1, true,
           fmt("t/x rates in [0.75, 1.30], coarsest MAX %.3e / %.3e, %.1f s",
               tt.front().max_err, tx.front().max_err, wall));
}

void criterion2() {
    const std::string dir = "acceptance_out";
    bool ok =
        run_cli("table --preset exp1 --scheme nn --optimizer lm --hidden 10 --axis t --out " + dir) &&
        run_cli("table --preset exp1 --scheme nn --optimizer lm --hidden 10 --axis x --out " + dir);
    std::vector<TableRow> tt, tx;
    ok = ok && read_table(dir + "/exp1_nn_t_table.csv", tt) &&
         read_table(dir + "/exp1_nn_x_table.csv", tx);
    if (!ok) {
        report(2, false, "table command failed");
        return;
    }
    std::string why;
    for (auto* rows : {&tt, &tx}) {
        if (!rates_in_band(*rows, 0.6, 1.5, why)) {
            report(2, false, why);
            return;
        }
        double c = rows->front().max_err;
        if (!(c >= 7.47e-2 / 3 && c <= 7.47e-2 * 3)) {
            report(2, false, fmt("coarsest MAX %.3e not within factor 3 of 7.47e-2", c));
            return;
        }
    }
    report(2, true,
           fmt("t/x rates in [0.6, 1.5], coarsest MAX %.3e / %.3e",
               tt.front().max_err, tx.front().max_err));
}

void criterion4() {
    const std::string dir = "acceptance_out";
    std::vector<std::vector<TableRow>> tables(3);
    const char* axes[] = {"t", "x", "p"};
    for (int a = 0; a < 3; ++a) {
        if (!run_cli(fmt("table --preset exp2 --scheme sl --axis %s --out %s",
                         axes[a], dir.c_str())) ||
            !read_table(fmt("%s/exp2_sl_%s_table.csv", dir.c_str(), axes[a]),
                        tables[a])) {
            report(4, false, fmt("axis %s table failed", axes[a]));
            return;
        }
    }
    for (int a = 0; a < 3; ++a) {
        std::string why;
        if (!rates_in_band(tables[a], 0.4, 1.9, why)) {
            report(4, false, fmt("axis %s: %s", axes[a], why.c_str()));
            return;
        }
    }
    std::string why;
    if (!rates_in_band(tables[0], 0.8, 1.3, why)) {
        report(4, false, "t axis: " + why);
        return;
    }
    report(4, true, "t/x/p rates in [0.4, 1.9]; t rates in [0.8, 1.3]");
}

// ---- In-process criteria --------------------------------------------------

void criterion3() {
    ProblemSpec p = preset_experiment2();
    const int N = 64, L = 64, M = 64;
    SolverConfig cfg = make_config(p, N, L, M);
    SolverConfig flat = cfg;
    flat.convexify = false;
    SolutionField uc = solve(p, cfg);
    SolutionField uf = solve(p, flat);
    auto half_gap_min = [&](const SolutionField& u) {
        double worst = 1e300;
        for (int n = 0; n <= N; ++n)
            for (int l = 0; l <= L; ++l)
                worst = std::min(worst, 0.5 * (u.at(n, l, 0) + u.at(n, l, M)) -
                                            u.at(n, l, M / 2));
        return worst;
    };
    double unc = half_gap_min(uf);
    double con = half_gap_min(uc);
    bool pass = unc < -1e-3 && con >= -1e-10;
    report(3, pass,
           fmt("half-sum gap min: unconstrained %.3e (< -1e-3), constrained %.3e (>= -1e-10)",
               unc, con));
}

void criterion5() {
    ProblemSpec p = preset_experiment3();
    SolverConfig cfg = make_config(p, 256, 256, 32);
    SolutionField u = solve(p, cfg);
    ActiveSetMask mask = active_sets(u, p, 0, 2e-5);
    const SpaceGrid& xg = u.space_grid();
    int upper_mid_levels = 0;
    double lower_min_x = 1e300;
    for (int n = 0; n < u.nt(); ++n) {
        bool mid = false;
        for (int l = 0; l < u.nx(); ++l) {
            double x = xg.node(l);
            if (mask.is_upper(n, l) && x >= 0.65 && x <= 0.75) mid = true;
            if (mask.is_lower(n, l)) lower_min_x = std::min(lower_min_x, x);
        }
        if (mid) ++upper_mid_levels;
    }
    // The cancellation region is an island around x ~ ln 2 that closes before
    // the horizon, so the waiting region has one component as a set in (t, x)
    // even though fixed-t slices straddle the island; the quasi-Newton
    // artefact is an extra waiting island inside the exercise region.
    auto waiting = [&](int n, int l) { return !mask.is_lower(n, l) && !mask.is_upper(n, l); };
    const int nt = u.nt(), nx = u.nx();
    std::vector<char> seen(static_cast<std::size_t>(nt) * nx, 0);
    int components = 0;
    for (int n0 = 0; n0 < nt; ++n0)
        for (int l0 = 0; l0 < nx; ++l0) {
            if (!waiting(n0, l0) || seen[static_cast<std::size_t>(n0) * nx + l0]) continue;
            ++components;
            std::vector<std::pair<int, int>> stack{{n0, l0}};
            seen[static_cast<std::size_t>(n0) * nx + l0] = 1;
            while (!stack.empty()) {
                auto [n, l] = stack.back();
                stack.pop_back();
                const int dn[] = {1, -1, 0, 0}, dl[] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int nn = n + dn[k], ll = l + dl[k];
                    if (nn < 0 || nn >= nt || ll < 0 || ll >= nx) continue;
                    std::size_t idx = static_cast<std::size_t>(nn) * nx + ll;
                    if (!waiting(nn, ll) || seen[idx]) continue;
                    seen[idx] = 1;
                    stack.push_back({nn, ll});
                }
            }
        }
    bool pass = upper_mid_levels > 0 && lower_min_x <= 0.2 && components == 1;
    report(5, pass,
           fmt("upper-active in x=[0.65,0.75] at %d levels; lower-active from x=%.3f; waiting components: %d",
               upper_mid_levels, lower_min_x, components));
}

bool check(bool ok, const char* what, std::string& why) {
    if (!ok && why.empty()) why = what;
    return ok;
}

void criterion6() {
    double t0 = now_s();
    std::string why;
    bool pass = true;
    std::mt19937_64 rng(2026);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    // Envelope oracle equivalence, nonexpansiveness, idempotence, linear
    // minorant, feedback identities.
    for (int trial = 0; trial < 200 && pass; ++trial) {
        int cells = 2 + static_cast<int>(u01(rng) * 10.0001);  // nodes <= 12+1
        SimplexGrid g = SimplexGrid::uniform(2, cells);
        std::vector<double> v(g.size()), w(g.size());
        for (auto& y : v) y = 2.0 * u01(rng) - 1.0;
        for (auto& y : w) y = 2.0 * u01(rng) - 1.0;
        EnvelopeResult env = lower_convex_envelope(g, v);
        for (int m = 0; m < g.size(); ++m) {
            SupportWeights sw;
            double lp = envelope_lp(g, v, g.point(m), &sw);
            pass &= check(std::abs(lp - env.env_values()[m]) <= 1e-10,
                          "hull vs LP mismatch", why);
        }
        EnvelopeResult envw = lower_convex_envelope(g, w);
        double dv = 0.0, de = 0.0;
        for (int m = 0; m < g.size(); ++m) {
            dv = std::max(dv, std::abs(v[m] - w[m]));
            de = std::max(de, std::abs(env.env_values()[m] - envw.env_values()[m]));
        }
        pass &= check(de <= dv + 1e-12, "envelope not nonexpansive", why);
        std::vector<double> once(env.env_values().begin(), env.env_values().end());
        EnvelopeResult twice = lower_convex_envelope(g, once);
        for (int m = 0; m < g.size(); ++m)
            pass &= check(std::abs(twice.env_values()[m] - once[m]) <= 1e-12,
                          "envelope not idempotent", why);
        // Adding a linear function commutes with the envelope.
        double a = 2.0 * u01(rng) - 1.0, b = 2.0 * u01(rng) - 1.0;
        std::vector<double> vl(v);
        for (int m = 0; m < g.size(); ++m) vl[m] += a * g.param(m) + b;
        EnvelopeResult envl = lower_convex_envelope(g, vl);
        for (int m = 0; m < g.size(); ++m)
            pass &= check(std::abs(envl.env_values()[m] -
                                   (env.env_values()[m] + a * g.param(m) + b)) <= 1e-10,
                          "linear minorant not preserved", why);
        // Feedback: martingale mean and marginal law on the support.
        for (int m = 0; m < g.size() && pass; ++m) {
            FeedbackDistribution marg = feedback_marginal(env, m);
            std::vector<double> mean = marg.mean(g);
            pass &= check(std::abs(mean[0] - g.param(m)) <= 1e-12,
                          "feedback mean not a martingale", why);
            double total = 0.0;
            for (const auto& o : marg.outcomes) {
                total += o.prob;
                bool in_support = false;
                for (const auto& [idx, wgt] : env.support(m).terms)
                    if (idx == o.node && std::abs(wgt - o.prob) <= 1e-12)
                        in_support = true;
                pass &= check(in_support, "marginal law differs from support weights", why);
            }
            pass &= check(std::abs(total - 1.0) <= 1e-12,
                          "marginal law not normalized", why);
        }
    }

    // One-step programming-principle identity on random small problems.
    for (int trial = 0; trial < 5 && pass; ++trial) {
        double a0 = 0.1 + 0.4 * u01(rng), b0 = 0.4 * u01(rng) - 0.2;
        double c1 = u01(rng), c2 = u01(rng), off = 0.3 * u01(rng) - 0.15;
        ProblemSpec p;
        p.name = "random";
        p.scenario_count = 2;
        p.drift = [b0](double, double) { return b0; };
        p.diffusion = [a0](double, double) { return a0; };
        p.lower_obstacle = [c1, c2](double, double x, std::span<double> out) {
            out[0] = c1 * std::cos(3 * x) - 0.3;
            out[1] = c2 * std::sin(2 * x + 1) - 0.3;
        };
        p.upper_obstacle = [c1, c2](double, double x, std::span<double> out) {
            out[0] = c1 * std::cos(3 * x) + 0.3;
            out[1] = c2 * std::sin(2 * x + 1) + 0.3;
        };
        p.terminal = [c1, c2, off](double x, std::span<double> out) {
            out[0] = c1 * std::cos(3 * x) + off;
            out[1] = c2 * std::sin(2 * x + 1) + off;
        };
        SolverConfig cfg = make_config(p, 2, 8, 5);
        SolutionField u = solve(p, cfg);
        const TimeGrid& tg = cfg.grids.time;
        const SpaceGrid& xg = cfg.grids.space;
        const SimplexGrid& pg = cfg.grids.simplex;
        int n = tg.steps - 1;
        double t = tg.node(n);
        std::vector<double> f(2), h(2), ybar(pg.size()), slice(xg.size());
        for (int l = 0; l < xg.size() && pass; ++l) {
            double x = xg.node(l);
            EulerStep step{t, tg.dt(), p.drift(t, x), p.diffusion(t, x)};
            p.eval_lower(t, x, f);
            p.eval_upper(t, x, h);
            for (int m = 0; m < pg.size(); ++m) {
                for (int l2 = 0; l2 < xg.size(); ++l2) slice[l2] = u.at(n + 1, l2, m);
                double e = expected_value(step, x, slice, xg);
                double pm = pg.param(m);
                ybar[m] = std::min(std::max(e, pm * f[0] + (1 - pm) * f[1]),
                                   pm * h[0] + (1 - pm) * h[1]);
            }
            EnvelopeResult env = lower_convex_envelope(pg, ybar);
            for (int m = 0; m < pg.size(); ++m) {
                pass &= check(std::abs(u.at(n, l, m) - env.env_values()[m]) <= 1e-10,
                              "one-step identity (envelope route)", why);
                double dpp = 0.0;
                for (const auto& o : feedback_marginal(env, m).outcomes)
                    dpp += o.prob * ybar[o.node];
                pass &= check(std::abs(u.at(n, l, m) - dpp) <= 1e-10,
                              "one-step identity (feedback route)", why);
            }
        }
    }

    // Obstacle sandwich, belief convexity and the belief-Lipschitz bound on
    // the game preset.
    {
        ProblemSpec p = preset_experiment3();
        SolverConfig cfg = make_config(p, 32, 32, 32);
        SolutionField u = solve(p, cfg);
        std::vector<double> f(2), h(2);
        for (int n = 0; n < u.nt() - 1 && pass; ++n) {
            double t = u.time_grid().node(n);
            for (int l = 0; l < u.nx(); ++l) {
                double x = u.space_grid().node(l);
                p.eval_lower(t, x, f);
                p.eval_upper(t, x, h);
                for (int m = 0; m < u.np(); ++m) {
                    double pm = u.simplex_grid().param(m);
                    pass &= check(u.at(n, l, m) >= pm * f[0] + (1 - pm) * f[1] - 1e-12,
                                  "lower obstacle violated", why);
                    pass &= check(u.at(n, l, m) <= pm * h[0] + (1 - pm) * h[1] + 1e-12,
                                  "upper obstacle violated", why);
                }
                for (int m = 1; m + 1 < u.np(); ++m)
                    pass &= check(u.at(n, l, m - 1) - 2 * u.at(n, l, m) +
                                          u.at(n, l, m + 1) >= -1e-10,
                                  "belief convexity violated", why);
            }
        }
        DataBounds b = sample_data_bounds(p);
        double lip_p = regularity_constants(u).lip_p;
        double bound = std::max({b.sup_f, b.lip_g, b.sup_h});
        pass &= check(lip_p <= bound + 1e-8, "belief-Lipschitz bound violated", why);
    }

    // Trainer gradient vs central finite differences.
    for (Activation act : {Activation::Tanh, Activation::GroupSort}) {
        FeedforwardNet net = make_mlp(6, act, 99, act == Activation::GroupSort ? 2 : 0);
        int P = net.param_count();
        std::vector<double> xs{-0.7, -0.2, 0.1, 0.4, 0.9}, ys{0.3, -0.1, 0.2, 0.0, -0.4};
        std::vector<double> theta(P), grad(P, 0.0), gfd(P);
        net.pack(theta);
        auto sse = [&](std::span<const double> th) {
            FeedforwardNet n2 = net;
            n2.unpack(th);
            double s = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                double r = n2.forward(xs[i]) - ys[i];
                s += r * r;
            }
            return s;
        };
        // Analytic: d/dtheta sum r^2 = sum 2 r * dnet/dtheta.
        std::vector<double> gi(P);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double r = net.forward_with_grad(xs[i], gi) - ys[i];
            for (int k = 0; k < P; ++k) grad[k] += 2.0 * r * gi[k];
        }
        const double eps = 1e-6;
        double worst = 0.0;
        for (int k = 0; k < P; ++k) {
            std::vector<double> tp(theta), tm(theta);
            tp[k] += eps;
            tm[k] -= eps;
            gfd[k] = (sse(tp) - sse(tm)) / (2 * eps);
            double scale = std::max({std::abs(grad[k]), std::abs(gfd[k]), 1e-8});
            worst = std::max(worst, std::abs(grad[k] - gfd[k]) / scale);
        }
        pass &= check(worst <= 1e-5, "trainer gradient vs finite differences", why);
    }

    // Scheme equivalence: regression solver with the interpolant stub.
    for (const char* name : {"exp1", "exp2", "exp3"}) {
        ProblemSpec p = preset_by_name(name);
        SolverConfig cfg = make_config(p, 6, 10, 6);
        SolutionField u_sl = solve(p, cfg);
        NNSolverConfig nn;
        nn.base = cfg;
        NNSolveResult res = solve_nn(p, nn, interpolant_oracle_factory(cfg.grids.space));
        double gap = 0.0;
        for (int n = 0; n < u_sl.nt(); ++n)
            for (int l = 0; l < u_sl.nx(); ++l)
                for (int m = 0; m < u_sl.np(); ++m)
                    gap = std::max(gap, std::abs(res.field.at(n, l, m) - u_sl.at(n, l, m)));
        pass &= check(gap <= 1e-12, "interpolant-stub scheme equivalence", why);
    }

    double wall = now_s() - t0;
    pass &= check(wall < 10.0, "property suite exceeded 10 s", why);
    report(6, pass,
           pass ? fmt("all properties hold, %.1f s", wall) : why + fmt(" (%.1f s)", wall));
}

void criterion7() {
    ProblemSpec p = preset_experiment3();
    const int N = 32;
    SolverConfig cfg = make_config(p, N, N, N);
    SolutionField u_sl = solve(p, cfg);
    NNSolverConfig nn;
    nn.base = cfg;
    nn.seed = 1;
    NNSolveResult res = solve_nn(p, nn);
    double lhs = 0.0;
    for (int n = 0; n <= N; ++n)
        for (int l = 0; l < u_sl.nx(); ++l)
            for (int m = 0; m < u_sl.np(); ++m)
                lhs = std::max(lhs, std::abs(res.field.at(n, l, m) - u_sl.at(n, l, m)));
    double lip_x = regularity_constants(u_sl).lip_x;
    double dx = cfg.grids.space.dx();
    double eps_sum = 0.0;
    for (double e : res.residual_trace) eps_sum += e;
    double rhs = 2.0 * N * lip_x * dx + eps_sum;
    bool pass = lhs <= rhs;
    g_manifest["criterion7"] = {{"max_nodal_gap", lhs},
                               {"bound", rhs},
                               {"slack", rhs - lhs},
                               {"lip_x_emp", lip_x},
                               {"residual_sum", eps_sum}};
    report(7, pass, fmt("max |NN-SL| = %.3e <= bound %.3e (slack %.3e)", lhs, rhs, rhs - lhs));
}

}  // namespace

int main() {
    if (std::string(cli_path()).empty())
        std::printf("note: DYNKIN_CLI not set; CLI-driven criteria will fail\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    std::ofstream("acceptance_manifest.json") << g_manifest.dump(2) << "\n";
    std::printf("%s (%d of 7 criteria failed)\n", g_failures ? "FAIL" : "PASS",
                g_failures);
    return g_failures ? 1 : 0;
}
