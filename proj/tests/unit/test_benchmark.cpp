#include <doctest.h>

#include <cmath>

#include "isac/benchmark.hpp"
#include "isac/error.hpp"
#include "isac/rng.hpp"

using namespace isac;
using doctest::Approx;

namespace {

ChannelSet from_vectors(std::vector<cvec> h) {
    ChannelSet ch;
    ch.h = std::move(h);
    return ch;
}

ChannelSet random_channels(Rng& rng, int users, int antennas, double scale) {
    std::vector<cvec> h;
    for (int k = 0; k < users; ++k) {
        cvec v(antennas);
        for (int i = 0; i < antennas; ++i)
            v(i) = scale * rng.complex_normal();
        h.push_back(v);
    }
    return from_vectors(h);
}

}  // namespace

TEST_CASE("single UE is MRT at minimum power") {
    Rng rng(1);
    const ChannelSet ch = random_channels(rng, 1, 4, 1e-4);
    const double s2 = 1e-12, g = 100.0;
    const BeamformerSet w = comm_only_beamforming(ch, {g}, s2);
    const double pmin = s2 * g / ch.h[0].squaredNorm();
    CHECK(w.power() == Approx(pmin).epsilon(1e-6));
    const cvec expected = std::sqrt(pmin) * ch.h[0] / ch.h[0].norm();
    CHECK((w.matrix().col(0) - expected).norm() <= 1e-4 * expected.norm());
    CHECK(w.matrix().rightCols(3).norm() == 0.0);
    CHECK(w.k_comm() == 1);
}

TEST_CASE("orthogonal channels decouple") {
    cvec h1 = cvec::Zero(3), h2 = cvec::Zero(3);
    h1(0) = 2e-3;
    h2(1) = std::complex<double>(0.0, 1e-3);
    const ChannelSet ch = from_vectors({h1, h2});
    const double s2 = 1e-9;
    const BeamformerSet w = comm_only_beamforming(ch, {10.0, 50.0}, s2);
    const double expected = s2 * 10.0 / h1.squaredNorm() + s2 * 50.0 / h2.squaredNorm();
    CHECK(w.power() == Approx(expected).epsilon(1e-6));
}

TEST_CASE("zero thresholds give zero beams") {
    Rng rng(2);
    const ChannelSet ch = random_channels(rng, 2, 4, 1.0);
    const BeamformerSet w = comm_only_beamforming(ch, {0.0, 0.0}, 1.0);
    CHECK(w.power() < 1e-12);
}

TEST_CASE("constraints are active at the optimum") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const ChannelSet ch = random_channels(rng, 3, 6, 1e-3);
        const double s2 = 1e-10;
        const std::vector<double> g{20.0, 50.0, 100.0};
        const BeamformerSet w = comm_only_beamforming(ch, g, s2);
        const auto sinr = comm_sinrs(w, ch, s2);
        for (int k = 0; k < 3; ++k) {
            CHECK(sinr[k] == Approx(g[k]).epsilon(1e-6));
            CHECK(std::abs(std::arg(ch.h[k].dot(w.matrix().col(k)))) < 1e-9);
        }
    }
}

TEST_CASE("power is monotone in the thresholds") {
    Rng rng(4);
    const ChannelSet ch = random_channels(rng, 2, 4, 1e-3);
    const double s2 = 1e-10;
    double last = 0.0;
    for (double g : {1.0, 5.0, 20.0, 80.0, 300.0}) {
        const double p = comm_only_beamforming(ch, {g, 10.0}, s2).power();
        CHECK(p >= last * (1 - 1e-7));
        last = p;
    }
}

TEST_CASE("infeasible and invalid inputs") {
    cvec h = cvec::Zero(2);
    h(0) = 1.0;
    // two UEs on the same channel cannot both exceed 0 dB
    const ChannelSet same = from_vectors({h, h});
    CHECK_THROWS_AS(comm_only_beamforming(same, {2.0, 2.0}, 1.0), InfeasibleError);
    const ChannelSet one = from_vectors({h});
    CHECK_THROWS_AS(comm_only_beamforming(one, {1.0, 1.0}, 1.0), ValidationError);
    CHECK_THROWS_AS(comm_only_beamforming(one, {-1.0}, 1.0), ValidationError);
    CHECK_THROWS_AS(comm_only_beamforming(one, {1.0}, 0.0), ValidationError);
    CHECK_THROWS_AS(comm_only_beamforming(from_vectors({}), {}, 1.0), ValidationError);
}

TEST_CASE("sinr block rejects non-positive thresholds") {
    Rng rng(5);
    const ChannelSet ch = random_channels(rng, 1, 2, 1.0);
    conic::ComplexEmbedding emb({2}, 0);
    CHECK_THROWS_AS(sinr_block("s", ch, 0, 0.0, emb, 1, 4, 1.0), ValidationError);
    const auto blk = sinr_block("s", ch, 0, 2.0, emb, 1, 4, 1.0);
    CHECK(blk.kind == conic::ConeKind::second_order);
    CHECK(blk.rows() == 2);
}
