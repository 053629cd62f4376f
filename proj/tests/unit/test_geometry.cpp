#include <doctest.h>

#include <cmath>
#include <numbers>

#include "isac/error.hpp"
#include "isac/geometry.hpp"
#include "isac/metrics.hpp"
#include "isac/rng.hpp"
#include "isac/scenario.hpp"

using namespace isac;
using doctest::Approx;

constexpr double pi = std::numbers::pi;

TEST_CASE("angles: horizontal toward +y") {
    const auto a = angles_from_positions({0, 0, 10}, {0, 50, 10});
    CHECK(a.theta == Approx(pi / 2).epsilon(1e-14));
    CHECK(a.phi == Approx(pi / 2).epsilon(1e-14));
}

TEST_CASE("angles: straight down uses phi = 0") {
    const auto a = angles_from_positions({0, 0, 10}, {0, 0, 0});
    CHECK(a.theta == Approx(pi).epsilon(1e-14));
    CHECK(a.phi == 0.0);
}

TEST_CASE("angles: round trip of the UE placement") {
    const Position o{0, 0, 10};
    const double th = deg2rad(135.0), ph = deg2rad(150.0);
    const Position t{30 * std::sin(th) * std::cos(ph), 30 * std::sin(th) * std::sin(ph), 10 + 30 * std::cos(th)};
    const auto a = angles_from_positions(o, t);
    CHECK(std::abs(a.theta - th) < 1e-9);
    CHECK(std::abs(a.phi - ph) < 1e-9);
    const Position p = place(o, {th, ph}, 30.0);
    CHECK(distance(p, t) < 1e-12);
}

TEST_CASE("angles: random round trips and phi range") {
    Rng rng(3);
    const Position o{1, -2, 7};
    for (int i = 0; i < 500; ++i) {
        const DirectionAngles in{0.01 + (pi - 0.02) * rng.uniform(), 2 * pi * rng.uniform()};
        const auto out = angles_from_positions(o, place(o, in, 1 + 80 * rng.uniform()));
        CHECK(std::abs(out.theta - in.theta) < 1e-9);
        const double dphi = std::remainder(out.phi - in.phi, 2 * pi);
        CHECK(std::abs(dphi) < 1e-9);
        CHECK(out.phi >= 0.0);
        CHECK(out.phi < 2 * pi);
    }
}

TEST_CASE("angles: coincident positions") {
    CHECK_THROWS_AS(angles_from_positions({1, 2, 3}, {1, 2, 3}), DegenerateGeometryError);
}

TEST_CASE("steering: broadside is all ones") {
    const cvec b = upa_steering({pi / 2, pi / 2}, {8, 8, 0.5});
    REQUIRE(b.size() == 64);
    CHECK((b - cvec::Ones(64)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(b.squaredNorm() == Approx(64.0));
}

TEST_CASE("steering: endfire along x alternates sign per x step") {
    const cvec b = upa_steering({pi / 2, 0.0}, {8, 8, 0.5});
    for (int m = 0; m < 8; ++m)
        for (int n = 0; n < 8; ++n) {
            const std::complex<double> e = b(m * 8 + n);
            CHECK(std::abs(e - std::complex<double>(m % 2 ? -1.0 : 1.0, 0.0)) < 1e-12);
        }
}

TEST_CASE("steering: 2x2 entry (2,2)") {
    const double th = deg2rad(60.0), ph = deg2rad(45.0);
    const cvec b = upa_steering({th, ph}, {2, 2, 0.5});
    const double phase = pi * (std::sin(th) * std::cos(ph) + std::cos(th));
    CHECK(b.squaredNorm() == Approx(4.0));
    CHECK(std::abs(b(3) - std::polar(1.0, phase)) < 1e-12);
    CHECK(std::abs(b(1) - std::polar(1.0, pi * std::cos(th))) < 1e-12);
    CHECK(std::abs(b(2) - std::polar(1.0, pi * std::sin(th) * std::cos(ph))) < 1e-12);
}

TEST_CASE("steering: unit modulus, norm and phi periodicity") {
    Rng rng(11);
    const ArrayGeometry g{5, 3, 0.37};
    for (int i = 0; i < 200; ++i) {
        const DirectionAngles a{pi * rng.uniform(), 2 * pi * rng.uniform()};
        const cvec b = upa_steering(a, g);
        CHECK(std::abs(b.squaredNorm() - 15.0) <= 15.0 * 1e-12);
        CHECK((b.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-12);
        const cvec b2 = upa_steering({a.theta, a.phi + 2 * pi}, g);
        CHECK((b - b2).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("array geometry validation") {
    CHECK_THROWS_AS((ArrayGeometry{0, 4, 0.5}.validate()), ValidationError);
    CHECK_THROWS_AS((ArrayGeometry{4, 4, 0.0}.validate()), ValidationError);
    CHECK_NOTHROW((ArrayGeometry{1, 1, 0.5}.validate()));
}

TEST_CASE("grid: 50 x 50 lattice") {
    const Scenario sc = full_scenario();
    const CoverageGrid g = build_coverage_grid({0, 50, 50, 50, 10}, 50, 50, sc);
    CHECK(g.size() == 2500);
    CHECK(g.spacing_x == Approx(50.0 / 49.0));
    CHECK(g.spacing_y == Approx(50.0 / 49.0));
    CHECK(g.tx_steering.cols() == 2500);
    CHECK(g.rx_steering.cols() == 2500);
    for (const auto& p : g.points) {
        CHECK(p.x >= -25.0 - 1e-12);
        CHECK(p.x <= 25.0 + 1e-12);
        CHECK(p.y >= 25.0 - 1e-12);
        CHECK(p.y <= 75.0 + 1e-12);
        CHECK(p.z == 10.0);
    }
}

TEST_CASE("grid: single point is the center") {
    const Scenario sc = desk_scenario();
    const CoverageGrid g = build_coverage_grid({3, 40, 10, 20, 5}, 1, 1, sc);
    REQUIRE(g.size() == 1);
    CHECK(g.points[0] == Position{3, 40, 5});
}

TEST_CASE("grid: 3 x 3 corners and steering columns") {
    const Scenario sc = desk_scenario();
    const CoverageGrid g = build_coverage_grid({0, 50, 10, 10, 0}, 3, 3, sc);
    REQUIRE(g.size() == 9);
    CHECK(g.points[0] == Position{-5, 45, 0});
    CHECK(g.points[2] == Position{5, 45, 0});
    CHECK(g.points[6] == Position{-5, 55, 0});
    CHECK(g.points[8] == Position{5, 55, 0});
    CHECK(g.centroid() == Position{0, 50, 0});
    for (int l = 0; l < 9; ++l) {
        const cvec b = upa_steering(angles_from_positions(sc.bs1(), g.points[l]), sc.tx_array);
        const cvec a = upa_steering(angles_from_positions(sc.bs2(), g.points[l]), sc.rx_array);
        CHECK((g.tx_steering.col(l) - b).norm() < 1e-12);
        CHECK((g.rx_steering.col(l) - a).norm() < 1e-12);
    }
}

TEST_CASE("grid: invalid regions") {
    const Scenario sc = desk_scenario();
    CHECK_THROWS_AS(build_coverage_grid({0, 50, 0, 10, 0}, 3, 3, sc), ValidationError);
    CHECK_THROWS_AS(build_coverage_grid({0, 50, 10, 10, 0}, 0, 3, sc), ValidationError);
    CHECK_NOTHROW(build_coverage_grid({0, 50, 0, 10, 0}, 1, 3, sc));
}
