#ifndef DYNKIN_PROBLEM_HPP
#define DYNKIN_PROBLEM_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dynkin {

/// Continuous problem data: Ito coefficients, payoff obstacles, terminal
/// payoff and an optional running source. Obstacles are optional; an empty
/// function means the corresponding bound is absent (-inf / +inf).
///
/// All coefficient callbacks take (t, x); the source additionally receives
/// the simplex point as a span of I barycentric coordinates.
struct ProblemSpec {
    std::string name;
    double horizon = 1.0;
    int scenario_count = 1;
    double x_lo = 0.0;
    double x_hi = 1.0;

    std::function<double(double, double)> drift;      // b(t,x)
    std::function<double(double, double)> diffusion;  // a(t,x)

    using VectorFn = std::function<void(double, double, std::span<double>)>;
    VectorFn lower_obstacle;  // f(t,x) -> I components; empty = unconstrained
    VectorFn upper_obstacle;  // h(t,x) -> I components; empty = unconstrained

    std::function<void(double, std::span<double>)> terminal;  // g(x) -> I components
    std::function<double(double, double, std::span<const double>)> source;  // H(t,x,p)

    // Closed-form solution when one exists (experiment presets only).
    std::function<double(double, double)> exact;

    bool has_lower() const { return static_cast<bool>(lower_obstacle); }
    bool has_upper() const { return static_cast<bool>(upper_obstacle); }
    bool has_source() const { return static_cast<bool>(source); }
    bool has_exact() const { return static_cast<bool>(exact); }

    void eval_lower(double t, double x, std::span<double> out) const { lower_obstacle(t, x, out); }
    void eval_upper(double t, double x, std::span<double> out) const { upper_obstacle(t, x, out); }
    void eval_terminal(double x, std::span<double> out) const { terminal(x, out); }
};

// The three experiment presets.
ProblemSpec preset_experiment1();
ProblemSpec preset_experiment2();
ProblemSpec preset_experiment3();

/// Preset lookup by CLI name ("exp1", "exp2", "exp3"); throws
/// std::invalid_argument on an unknown name.
ProblemSpec preset_by_name(const std::string& name);

/// Terminal compatibility check: p.f(T,x) <= p.g(x) <= p.h(T,x) for all
/// sampled x and simplex vertices. Returns the worst violation (<= 0 means
/// compatible).
double compatibility_violation(const ProblemSpec& problem, int x_samples = 257);

}  // namespace dynkin

#endif
