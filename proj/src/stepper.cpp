#include "dynkin/stepper.hpp"

#include <cmath>
#include <stdexcept>

namespace dynkin {

std::span<const Shock> two_point_walk() {
    static const Shock atoms[2] = {{1.0, 0.5}, {-1.0, 0.5}};
    return {atoms, 2};
}

std::vector<std::pair<double, double>> successors(const EulerStep& step, double x) {
    if (!(step.dt > 0.0)) throw std::invalid_argument("euler step: dt must be positive");
    std::vector<std::pair<double, double>> out;
    out.reserve(step.shocks.size());
    double root_dt = std::sqrt(step.dt);
    for (const Shock& s : step.shocks)
        out.emplace_back(x + step.drift * step.dt + step.diffusion * root_dt * s.value,
                         s.prob);
    return out;
}

double expected_value(const EulerStep& step, double x,
                      std::span<const double> slice, const SpaceGrid& grid) {
    if (!(step.dt > 0.0)) throw std::invalid_argument("euler step: dt must be positive");
    double root_dt = std::sqrt(step.dt);
    double acc = 0.0;
    for (const Shock& s : step.shocks) {
        double xs = x + step.drift * step.dt + step.diffusion * root_dt * s.value;
        acc += s.prob * interp_x(slice, grid, xs);
    }
    return acc;
}

}  // namespace dynkin
