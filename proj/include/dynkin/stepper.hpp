#ifndef DYNKIN_STEPPER_HPP
#define DYNKIN_STEPPER_HPP

#include <span>
#include <vector>

#include "dynkin/grids.hpp"

namespace dynkin {

/// One atom of the driving noise: value xi_k with probability prob_k.
struct Shock {
    double value;
    double prob;
};

/// The two-point walk xi = +-1 with probability 1/2.
std::span<const Shock> two_point_walk();

/// One Euler step of the state process frozen at (t_n, x): coefficients are
/// already evaluated, the shock set has zero mean and unit variance.
struct EulerStep {
    double t_n = 0.0;
    double dt = 0.0;
    double drift = 0.0;      // b(t_n, x)
    double diffusion = 0.0;  // a(t_n, x)
    std::span<const Shock> shocks = two_point_walk();
};

/// All successor states x + b*dt + a*sqrt(dt)*xi_k with their probabilities.
/// Throws if dt <= 0.
std::vector<std::pair<double, double>> successors(const EulerStep& step, double x);

/// Exact expectation of the interpolated slice over the one-step transition;
/// pure enumeration over the shock set, no sampling.
double expected_value(const EulerStep& step, double x,
                      std::span<const double> slice, const SpaceGrid& grid);

}  // namespace dynkin

#endif
