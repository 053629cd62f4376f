#include <doctest.h>

#include <cmath>

#include "isac/closed_form.hpp"
#include "isac/error.hpp"
#include "isac/rng.hpp"

using namespace isac;
using doctest::Approx;

namespace {

cvec random_vector(Rng& rng, int n) {
    cvec v(n);
    for (int i = 0; i < n; ++i)
        v(i) = rng.complex_normal();
    return v;
}

cmat random_psd(Rng& rng, int n, int rank) {
    cmat a(n, rank);
    for (int j = 0; j < rank; ++j)
        a.col(j) = random_vector(rng, n);
    return a * a.adjoint();
}

double objective(const cvec& b0, const cvec& w) { return std::norm(b0.dot(w)); }

}  // namespace

TEST_CASE("zero threshold gives the sensing beam") {
    Rng rng(1);
    const cvec h = random_vector(rng, 4), b = random_vector(rng, 4);
    const auto s = optimal_single(h, b, 2.0, 0.1, 0.0);
    CHECK(s.regime == Regime::sensing_limited);
    CHECK((s.w1 - std::sqrt(2.0) * b / b.norm()).norm() < 1e-12);
    CHECK(s.objective == Approx(2.0 * b.squaredNorm()).epsilon(1e-12));
    CHECK(s.boundary_threshold == Approx(std::norm(h.dot(b / b.norm())) * 2.0 / 0.1).epsilon(1e-12));
}

TEST_CASE("orthogonal channel and sensing direction") {
    cvec h(2), b(2);
    h << 0.0, 2.0;
    b << 1.0, 0.0;
    const double P = 1.0, s2 = 0.5;
    const double gamma = P / 2 * h.squaredNorm() / s2;  // s2 * gamma / ||h||^2 = P / 2
    const auto s = optimal_single(h, b, P, s2, gamma);
    CHECK(s.regime == Regime::comm_limited);
    CHECK(s.boundary_threshold == 0.0);
    CHECK(s.objective == Approx(P / 2 * b.squaredNorm()).epsilon(1e-12));
    CHECK(objective(b, s.w1) == Approx(P / 2 * b.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("continuity at the branch boundary") {
    Rng rng(3);
    const cvec h = random_vector(rng, 6), b = random_vector(rng, 6);
    const double P = 0.1, s2 = 1e-3;
    const double g_star = optimal_single(h, b, P, s2, 0.0).boundary_threshold;
    const auto at = optimal_single(h, b, P, s2, g_star);
    CHECK(std::abs(b.dot(at.w1)) == Approx(std::sqrt(P) * b.norm()).epsilon(1e-12));
    const double lo = optimal_single(h, b, P, s2, g_star * (1 - 1e-12)).objective;
    const double hi = optimal_single(h, b, P, s2, g_star * (1 + 1e-12)).objective;
    CHECK(optimal_single(h, b, P, s2, g_star * (1 + 1e-12)).regime == Regime::comm_limited);
    CHECK(std::abs(hi - lo) / lo < 1e-9);
}

TEST_CASE("full power and tight SINR on random instances") {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 8;
        const cvec h = random_vector(rng, n), b = random_vector(rng, n);
        const double P = 0.5 + rng.uniform(), s2 = 0.01 + rng.uniform();
        const double gmax = max_feasible_sinr(h, P, s2);
        CHECK(gmax == Approx(h.squaredNorm() * P / s2).epsilon(1e-14));
        const double g = gmax * rng.uniform();
        const auto s = optimal_single(h, b, P, s2, g);
        CHECK(s.w1.squaredNorm() == Approx(P).epsilon(1e-9));
        const double sinr = std::norm(h.dot(s.w1)) / s2;
        CHECK(sinr >= g * (1 - 1e-9));
        if (s.regime == Regime::comm_limited)
            CHECK(sinr == Approx(g).epsilon(1e-9));
        CHECK(s.objective == Approx(objective(b, s.w1)).epsilon(1e-12));
    }
}

TEST_CASE("closed form beats random feasible beams") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const cvec h = random_vector(rng, 3), b = random_vector(rng, 3);
        const double P = 1.0, s2 = 0.2;
        const double g = max_feasible_sinr(h, P, s2) * (0.3 + 0.6 * rng.uniform());
        const double best = optimal_single(h, b, P, s2, g).objective;
        for (int k = 0; k < 2000; ++k) {
            cvec w = random_vector(rng, 3);
            w *= std::sqrt(P) / w.norm();
            if (std::norm(h.dot(w)) >= s2 * g)
                CHECK(objective(b, w) <= best * (1 + 1e-12));
        }
    }
}

TEST_CASE("phase at zero correlation does not matter") {
    cvec h(3), b(3);
    h << 1.0, 0.0, 0.0;
    b << 0.0, 1.0, std::complex<double>(0.0, 1.0);
    const auto s = optimal_single(h, b, 1.0, 1.0, 0.25);
    for (double ph : {0.3, 1.9, 4.0}) {
        cvec w = s.w1;
        w(0) *= std::polar(1.0, ph);
        CHECK(objective(b, w) == Approx(s.objective).epsilon(1e-12));
    }
}

TEST_CASE("near-parallel channel and sensing direction") {
    Rng rng(6);
    const cvec b = random_vector(rng, 4);
    const cvec h = b * std::complex<double>(0.0, 2.0);
    const double gmax = max_feasible_sinr(h, 1.0, 1.0);
    const auto s = optimal_single(h, b, 1.0, 1.0, gmax);
    CHECK(s.objective == Approx(b.squaredNorm()).epsilon(1e-9));
    CHECK(std::isfinite(s.w1.norm()));
}

TEST_CASE("infeasible threshold and boundary margin") {
    cvec h(2), b(2);
    h << 1.0, 0.0;
    b << 0.0, 1.0;
    CHECK_THROWS_AS(optimal_single(h, b, 1.0, 1.0, 1.0 + 1e-6), InfeasibleError);
    CHECK_NOTHROW(optimal_single(h, b, 1.0, 1.0, 1.0 + 1e-13));
    CHECK_THROWS_AS(optimal_single(cvec::Zero(2), b, 1.0, 1.0, 0.0), DegenerateGeometryError);
}

TEST_CASE("lemma 1 collapse") {
    Rng rng(7);
    const cmat r1 = random_psd(rng, 3, 1);
    const auto same = lemma1_collapse(r1, cmat::Zero(3, 3));
    CHECK((same.r_star - r1).norm() < 1e-15);
    CHECK(same.r_prime.norm() == 0.0);

    const cvec hb = random_vector(rng, 3), bb = random_vector(rng, 3);
    const cmat r1h = 0.4 * hb * hb.adjoint(), rph = 0.7 * bb * bb.adjoint();
    const auto c = lemma1_collapse(r1h, rph);
    CHECK((hb.adjoint() * c.r_star * hb)(0).real() >= (hb.adjoint() * r1h * hb)(0).real());

    for (int trial = 0; trial < 20; ++trial) {
        const cmat a = random_psd(rng, 4, 2), p = random_psd(rng, 4, 3);
        const cvec b = random_vector(rng, 4), h = random_vector(rng, 4);
        const auto out = lemma1_collapse(a, p);
        CHECK(out.r_star.trace().real() == Approx(a.trace().real() + p.trace().real()).epsilon(1e-12));
        const double obj = (b.adjoint() * out.r_star * b)(0).real();
        CHECK(obj == Approx((b.adjoint() * a * b)(0).real() + (b.adjoint() * p * b)(0).real()).epsilon(1e-12));
        CHECK((h.adjoint() * out.r_star * h)(0).real() >= (h.adjoint() * a * h)(0).real());
        CHECK(is_hermitian_psd(out.r_star));
    }
    cmat bad = cmat::Identity(2, 2);
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(lemma1_collapse(bad, cmat::Zero(2, 2)), ValidationError);
    CHECK_THROWS_AS(lemma1_collapse(cmat::Identity(2, 2), bad), ValidationError);
}
