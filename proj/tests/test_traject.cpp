#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mfc/traject.hpp"

using namespace mfc;

namespace {

// Central finite difference of the order-(k-1) evaluation.
double fd_derivative(const Trajectory& tr, double t, int order, double h = 1e-4) {
    return (tr.eval(t + h, order - 1) - tr.eval(t - h, order - 1)) / (2.0 * h);
}

}  // namespace

TEST_CASE("bezier transition boundary conditions and midpoint") {
    auto tr = Trajectory::bezier(0.0, 1.0, 0.0, 1.0);
    REQUIRE(tr.eval(0.0) == 0.0);
    REQUIRE(tr.eval(1.0) == 1.0);
    REQUIRE(tr.eval(-0.5) == 0.0);
    REQUIRE(tr.eval(2.0) == 1.0);
    REQUIRE_THAT(tr.eval(0.5), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(tr.eval(0.5, 1), Catch::Matchers::WithinAbs(1.875, 1e-12));
    for (int order : {1, 2}) {
        REQUIRE_THAT(tr.eval(1e-9, order), Catch::Matchers::WithinAbs(0.0, 1e-6));
        REQUIRE_THAT(tr.eval(1.0 - 1e-9, order), Catch::Matchers::WithinAbs(0.0, 1e-6));
        REQUIRE(tr.eval(-1.0, order) == 0.0);
        REQUIRE(tr.eval(3.0, order) == 0.0);
    }
}

TEST_CASE("degenerate bezier (y_from == y_to) is constant") {
    auto tr = Trajectory::bezier(2.0, 2.0, 1.0, 3.0);
    for (double t : {0.0, 1.5, 2.2, 10.0}) {
        REQUIRE(tr.eval(t) == 2.0);
        REQUIRE(tr.eval(t, 1) == 0.0);
        REQUIRE(tr.eval(t, 2) == 0.0);
    }
}

TEST_CASE("bezier transitions are monotone between distinct endpoints") {
    auto up = Trajectory::bezier(-1.0, 2.0, 0.0, 2.0);
    auto down = Trajectory::bezier(5.0, 1.0, 0.0, 0.7);
    double prev_up = up.eval(0.0), prev_down = down.eval(0.0);
    for (int k = 1; k <= 400; ++k) {
        const double tu = 2.0 * k / 400.0, td = 0.7 * k / 400.0;
        REQUIRE(up.eval(tu) >= prev_up - 1e-12);
        REQUIRE(down.eval(td) <= prev_down + 1e-12);
        prev_up = up.eval(tu);
        prev_down = down.eval(td);
    }
}

TEST_CASE("analytic derivatives match finite differences") {
    const Trajectory cases[] = {
        Trajectory::bezier(0.0, 1.0, 0.2, 1.7),
        Trajectory::sine(1.3, 2.0, 0.4, -0.5),
        Trajectory::piecewise(0.0, {{1.0, 0.5, 1.0}, {-0.5, 2.0, 0.8}}),
    };
    for (const auto& tr : cases) {
        for (double t : {0.7, 1.0, 1.3, 2.3}) {
            for (int order : {1, 2}) {
                const double fd = fd_derivative(tr, t, order);
                REQUIRE_THAT(tr.eval(t, order), Catch::Matchers::WithinAbs(fd, 5e-6));
            }
        }
    }
}

TEST_CASE("sine derivatives are the calculus ones") {
    const double A = 2.0, w = 3.0;
    auto tr = Trajectory::sine(A, w);
    for (double t : {0.0, 0.3, 1.1}) {
        REQUIRE_THAT(tr.eval(t, 2), Catch::Matchers::WithinAbs(-A * w * w * std::sin(w * t), 1e-12));
    }
}

TEST_CASE("constant trajectory derivatives vanish") {
    auto tr = Trajectory::constant(7.0);
    REQUIRE(tr.eval(123.0) == 7.0);
    for (int order : {1, 2, 3, 5}) REQUIRE(tr.eval(0.5, order) == 0.0);
}

TEST_CASE("trajectory argument validation") {
    REQUIRE_THROWS_AS(Trajectory::bezier(0, 1, 0, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(Trajectory::bezier(0, 1, 0, -2.0), std::invalid_argument);
    REQUIRE_THROWS_AS(Trajectory::piecewise(0.0, {{1.0, 2.0, 2.0}, {0.0, 3.0, 1.0}}),
                      std::invalid_argument);  // overlap
    auto tr = Trajectory::constant(1.0);
    REQUIRE_THROWS_AS(tr.eval(0.0, -1), std::invalid_argument);
}

TEST_CASE("piecewise chains transitions with constant holds") {
    auto tr = Trajectory::piecewise(0.0, {{1.0, 1.0, 2.0}, {0.25, 5.0, 1.0}});
    REQUIRE(tr.eval(0.0) == 0.0);
    REQUIRE(tr.eval(3.5) == 1.0);
    REQUIRE_THAT(tr.eval(2.0), Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE(tr.eval(7.0) == 0.25);
    REQUIRE(tr.eval(4.9, 1) == 0.0);
}

TEST_CASE("flat nominal plan for the non-minimum-phase plant") {
    const double a = 1.0, b = -1.0, c = -0.5;
    SECTION("y* = 0 gives z* = 0 and u* = 0") {
        auto plan = flat_nominal_nonminphase(Trajectory::constant(0.0), a, b, c, 0.0, 5.0, 0.01);
        for (double z : plan.z_star.samples) REQUIRE_THAT(z, Catch::Matchers::WithinAbs(0.0, 1e-12));
        for (double u : plan.u_star.samples) REQUIRE_THAT(u, Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    SECTION("constant y* = c0: z* = -c0/a, u* = bc * z*") {
        const double c0 = 2.0;
        auto plan = flat_nominal_nonminphase(Trajectory::constant(c0), a, b, c, 0.0, 5.0, 0.01);
        REQUIRE_THAT(plan.z_star.samples.front(), Catch::Matchers::WithinAbs(-c0 / a, 1e-9));
        REQUIRE_THAT(plan.u_star.samples.front(),
                     Catch::Matchers::WithinAbs(b * c * (-c0 / a), 1e-9));
    }
    SECTION("defining identity z*' - a z* = y* holds along a transition") {
        auto y_star = Trajectory::bezier(0.0, 1.0, 1.0, 2.0);
        auto plan = flat_nominal_nonminphase(y_star, a, b, c, 0.0, 10.0, 0.01);
        double sum_sq = 0.0;
        for (std::size_t k = 0; k < plan.z_star.size(); ++k) {
            const double t = plan.z_star.time_at(k);
            const double resid =
                plan.z_dot_star.samples[k] - a * plan.z_star.samples[k] - y_star.eval(t);
            sum_sq += resid * resid;
        }
        REQUIRE(std::sqrt(sum_sq / plan.z_star.size()) < 1e-4);
    }
    SECTION("u* identity: central difference of z*' reproduces u*") {
        auto y_star = Trajectory::bezier(0.0, 1.0, 1.0, 2.0);
        auto plan = flat_nominal_nonminphase(y_star, a, b, c, 0.0, 10.0, 0.01);
        for (std::size_t k = 1; k + 1 < plan.z_star.size(); k += 37) {
            const double zdd_fd = (plan.z_dot_star.samples[k + 1] - plan.z_dot_star.samples[k - 1]) /
                                  (2.0 * plan.z_star.ts);
            const double u_check = zdd_fd - (b + c) * plan.z_dot_star.samples[k] +
                                   b * c * plan.z_star.samples[k];
            REQUIRE_THAT(plan.u_star.samples[k], Catch::Matchers::WithinAbs(u_check, 1e-3));
        }
    }
    SECTION("a = 0 is rejected") {
        REQUIRE_THROWS_AS(flat_nominal_nonminphase(Trajectory::constant(0.0), 0.0, b, c, 0.0, 1.0, 0.01),
                          std::invalid_argument);
    }
}
