#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "dynkin/envelope.hpp"
#include "dynkin/grids.hpp"

using namespace dynkin;

TEST_CASE("time and space grids hit their endpoints exactly") {
    TimeGrid t{7, 0.7};
    CHECK(t.node(0) == 0.0);
    CHECK(t.node(7) == 0.7);
    CHECK(t.dt() == doctest::Approx(0.1));
    CHECK(t.size() == 8);

    SpaceGrid x{5, -1.0, 1.5};
    CHECK(x.node(0) == -1.0);
    CHECK(x.node(5) == 1.5);
    CHECK(x.dx() == doctest::Approx(0.5));
}

TEST_CASE("simplex grid over two scenarios is the uniform parametrization") {
    SimplexGrid g = SimplexGrid::uniform(2, 4);
    REQUIRE(g.size() == 5);
    for (int m = 0; m < 5; ++m) {
        CHECK(g.param(m) == doctest::Approx(m / 4.0));
        CHECK(g.point(m)[0] + g.point(m)[1] == doctest::Approx(1.0));
    }
    CHECK(g.dp() == doctest::Approx(0.25));
}

TEST_CASE("simplex grid for one scenario is the single point") {
    SimplexGrid g = SimplexGrid::uniform(1, 99);
    REQUIRE(g.size() == 1);
    CHECK(g.point(0)[0] == 1.0);
    CHECK(g.dp() == 0.0);
}

TEST_CASE("three-scenario lattice has binomial size and valid coordinates") {
    const int M = 4;
    SimplexGrid g = SimplexGrid::uniform(3, M);
    CHECK(g.size() == (M + 1) * (M + 2) / 2);
    for (int m = 0; m < g.size(); ++m) {
        double s = 0.0;
        for (double c : g.point(m)) {
            CHECK(c >= 0.0);
            s += c;
        }
        CHECK(s == doctest::Approx(1.0));
    }
}

TEST_CASE("piecewise-linear interpolation reproduces affine slices exactly") {
    SpaceGrid g{8, 0.0, 2.0};
    std::vector<double> slice(g.size());
    for (int l = 0; l < g.size(); ++l) slice[l] = 3.0 * g.node(l) - 1.0;
    for (double x : {0.0, 0.33, 1.0, 1.99, 2.0})
        CHECK(interp_x(slice, g, x) == doctest::Approx(3.0 * x - 1.0).epsilon(1e-14));
    // Clamp extrapolation outside the grid.
    CHECK(interp_x(slice, g, -5.0) == doctest::Approx(-1.0));
    CHECK(interp_x(slice, g, 9.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(interp_x(slice, g, std::nan("")), std::invalid_argument);
}

TEST_CASE("solution field layout and time interpolation") {
    SolutionField f(TimeGrid{2, 1.0}, SpaceGrid{3, 0.0, 1.0}, SimplexGrid::uniform(2, 2));
    REQUIRE(f.nt() == 3);
    REQUIRE(f.nx() == 4);
    REQUIRE(f.np() == 3);
    for (int n = 0; n < 3; ++n)
        for (int l = 0; l < 4; ++l)
            for (int m = 0; m < 3; ++m) f.at(n, l, m) = 100 * n + 10 * l + m;
    CHECK(f.p_slice(1, 2)[0] == doctest::Approx(120.0));
    CHECK(f.p_slice(1, 2)[2] == doctest::Approx(122.0));
    CHECK(f.level(2)[0] == doctest::Approx(200.0));
    // Linear blend between the two enclosing levels.
    CHECK(f.interp_t(0.25, 1, 1) == doctest::Approx(0.5 * 11 + 0.5 * 111));
    CHECK(f.interp_t(1.0, 1, 1) == doctest::Approx(211.0));
    CHECK_THROWS_AS(f.interp_t(1.5, 0, 0), std::invalid_argument);
    CHECK(f.min_value() == doctest::Approx(0.0));
    CHECK(f.max_value() == doctest::Approx(232.0));
}

TEST_CASE("full interpolation agrees with nodal values on convex data") {
    SolutionField f(TimeGrid{2, 1.0}, SpaceGrid{2, 0.0, 1.0}, SimplexGrid::uniform(2, 4));
    auto val = [](double t, double x, double p) {
        return (1.0 + t) * (x + p * p);  // convex in p
    };
    for (int n = 0; n < f.nt(); ++n)
        for (int l = 0; l < f.nx(); ++l)
            for (int m = 0; m < f.np(); ++m)
                f.at(n, l, m) = val(f.time_grid().node(n), f.space_grid().node(l),
                                    f.simplex_grid().param(m));
    for (int n = 0; n < f.nt(); ++n)
        for (int l = 0; l < f.nx(); ++l)
            for (int m = 0; m < f.np(); ++m)
                CHECK(f.value_at(f.time_grid().node(n), f.space_grid().node(l),
                                 f.simplex_grid().param(m)) ==
                      doctest::Approx(f.at(n, l, m)).epsilon(1e-12));
    CHECK_THROWS_AS(f.value_at(0.5, 0.5, 1.5), std::invalid_argument);
}
