#include "dynkin/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dynkin {

namespace {
constexpr double kPi = std::numbers::pi;
}

ProblemSpec preset_experiment1() {
    ProblemSpec p;
    p.name = "exp1";
    p.horizon = 1.0;
    p.scenario_count = 1;
    p.x_lo = 0.0;
    p.x_hi = 1.0;
    p.drift = [](double, double) { return 0.0; };
    p.diffusion = [](double, double x) { return 0.2 * x * (1.0 - x); };
    p.terminal = [](double x, std::span<double> g) { g[0] = -std::cos(3.0 * kPi * x); };
    p.source = [](double t, double x, std::span<const double>) {
        double a = 0.2 * x * (1.0 - x);
        double w = 3.0 * kPi;
        return w * std::sin(w * t) * std::cos(w * x) +
               0.5 * (w * a) * (w * a) * std::cos(w * t) * std::cos(w * x);
    };
    p.exact = [](double t, double x) {
        return std::cos(3.0 * kPi * t) * std::cos(3.0 * kPi * x);
    };
    return p;
}

ProblemSpec preset_experiment2() {
    ProblemSpec p;
    p.name = "exp2";
    p.horizon = 1.0;
    p.scenario_count = 2;
    p.x_lo = 0.0;
    p.x_hi = 1.0;
    p.drift = [](double, double) { return 0.0; };
    p.diffusion = [](double, double x) { return x * (1.0 - x); };
    p.terminal = [](double, std::span<double> g) { g[0] = 0.0; g[1] = 0.0; };
    p.source = [](double t, double x, std::span<const double> pp) {
        return std::sin(kPi * t) * std::cos(kPi * x) * std::sin(3.0 * kPi * pp[0]);
    };
    return p;
}

ProblemSpec preset_experiment3() {
    ProblemSpec p;
    p.name = "exp3";
    p.horizon = 1.0;
    p.scenario_count = 2;
    p.x_lo = 0.0;
    p.x_hi = 1.0;
    const double a = 0.2, r = 0.03;
    const double b = r - 0.5 * a * a;
    const double delta1 = 1.25e-1, delta2 = 6.5e-2;
    p.drift = [b](double, double) { return b; };
    p.diffusion = [a](double, double) { return a; };
    auto put = [](double x) { return std::max(2.0 - std::exp(x), 0.0); };
    p.terminal = [put](double x, std::span<double> g) {
        g[0] = put(x);
        g[1] = put(x);
    };
    p.lower_obstacle = [put](double, double x, std::span<double> f) {
        f[0] = put(x);
        f[1] = put(x);
    };
    p.upper_obstacle = [put, delta1, delta2](double, double x, std::span<double> h) {
        h[0] = put(x) + delta1;
        h[1] = put(x) + delta2;
    };
    return p;
}

ProblemSpec preset_by_name(const std::string& name) {
    if (name == "exp1") return preset_experiment1();
    if (name == "exp2") return preset_experiment2();
    if (name == "exp3") return preset_experiment3();
    throw std::invalid_argument("unknown preset: " + name);
}

double compatibility_violation(const ProblemSpec& problem, int x_samples) {
    const int I = problem.scenario_count;
    std::vector<double> f(I), g(I), h(I);
    double worst = -1e300;
    const double T = problem.horizon;
    for (int k = 0; k < x_samples; ++k) {
        double x = problem.x_lo +
                   (problem.x_hi - problem.x_lo) * k / (x_samples - 1.0);
        problem.eval_terminal(x, g);
        if (problem.has_lower()) {
            problem.eval_lower(T, x, f);
            for (int i = 0; i < I; ++i) worst = std::max(worst, f[i] - g[i]);
        }
        if (problem.has_upper()) {
            problem.eval_upper(T, x, h);
            for (int i = 0; i < I; ++i) worst = std::max(worst, g[i] - h[i]);
        }
    }
    return worst;
}

}  // namespace dynkin
