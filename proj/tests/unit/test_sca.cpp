#include <doctest.h>

#include <cmath>

#include "isac/benchmark.hpp"
#include "isac/closed_form.hpp"
#include "isac/error.hpp"
#include "isac/rng.hpp"
#include "isac/sca.hpp"

using namespace isac;
using doctest::Approx;

namespace {

cmat random_matrix(Rng& rng, int n) {
    cmat m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            m(i, j) = rng.complex_normal();
    return m;
}

struct Small {
    Scenario sc;
    ChannelSet ch;
    CoverageGrid grid;
};

Small small_instance(int mx, int mz, int nx, int ny, int users, std::uint64_t seed) {
    Small s;
    s.sc = desk_scenario();
    s.sc.tx_array = {mx, mz, 0.5};
    s.sc.grid_nx = nx;
    s.sc.grid_ny = ny;
    s.sc.seed = seed;
    s.sc.ues.resize(users);
    const double phis[] = {30.0, 150.0, 90.0};
    for (int k = 0; k < users; ++k)
        s.sc.ues[k] = UePlacement{{deg2rad(135.0), deg2rad(phis[k])}, 30.0, 100.0};
    if (users > 0)
        s.ch = generate_rician_channels(s.sc);
    s.grid = build_coverage_grid(s.sc.region, nx, ny, s.sc);
    eta_weights(s.grid, s.sc);
    return s;
}

}  // namespace

TEST_CASE("taylor bound: tangency, origin and global lower bound") {
    Rng rng(1);
    const int n = 4;
    const BeamformerSet w0(random_matrix(rng, n), 2);
    cvec b(n);
    for (int i = 0; i < n; ++i)
        b(i) = rng.complex_normal();
    const auto g = [&](const cmat& w) { return (w.adjoint() * b).squaredNorm(); };
    const TaylorBound t = taylor_lower_bound(w0, b);
    CHECK(t.evaluate(w0.matrix()) == Approx(g(w0.matrix())).epsilon(1e-12));
    CHECK(t.evaluate(cmat::Zero(n, n)) == Approx(-g(w0.matrix())).epsilon(1e-12));
    for (int i = 0; i < 500; ++i) {
        const cmat w = random_matrix(rng, n) * (0.1 + 3 * rng.uniform());
        CHECK(t.evaluate(w) <= g(w) * (1 + 1e-12) + 1e-12);
    }
}

TEST_CASE("config validation") {
    ScaConfig c;
    CHECK_NOTHROW(c.validate());
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.max_outer_iterations = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("subproblem: block structure and inputs") {
    Small s = small_instance(2, 2, 3, 3, 2, 3);
    const BeamformerSet init = initialize(s.ch, s.grid, s.sc);
    const Subproblem sp = build_subproblem(init, s.ch, s.grid, s.sc);
    const auto& p = sp.program;
    CHECK(p.dimension() == 2 * 4 * 4 + 1);
    CHECK(p.count_blocks(conic::ConeKind::second_order) == 2 + 1);
    CHECK(p.count_rows(conic::ConeKind::zero) == 2);
    CHECK(p.count_rows(conic::ConeKind::nonnegative) == 9);

    Scenario bad = s.sc;
    bad.ues[0].sinr_threshold = 0.0;
    CHECK_THROWS_AS(build_subproblem(init, s.ch, s.grid, bad), ValidationError);
    CoverageGrid empty;
    CHECK_THROWS_AS(build_subproblem(init, s.ch, empty, s.sc), ValidationError);
}

TEST_CASE("subproblem: duplicate grid points collapse") {
    Small s = small_instance(2, 2, 3, 3, 1, 4);
    std::vector<Position> pts = s.grid.points;
    std::vector<Position> doubled = pts;
    doubled.insert(doubled.end(), pts.begin(), pts.begin() + 4);
    CoverageGrid a = grid_from_points(pts, s.sc), b = grid_from_points(doubled, s.sc);
    eta_weights(a, s.sc);
    eta_weights(b, s.sc);
    CHECK(unique_grid_points(b).size() == pts.size());
    const BeamformerSet init = initialize(s.ch, a, s.sc);
    const Subproblem pa = build_subproblem(init, s.ch, a, s.sc);
    const Subproblem pb = build_subproblem(init, s.ch, b, s.sc);
    CHECK(pa.program.count_rows(conic::ConeKind::nonnegative) == pb.program.count_rows(conic::ConeKind::nonnegative));
    const auto ra = conic::solve(pa.program), rb = conic::solve(pb.program);
    CHECK(pa.decode_zeta(ra.x) == Approx(pb.decode_zeta(rb.x)).epsilon(1e-9));
}

TEST_CASE("initialize: no UEs puts all power on the centroid") {
    Small s = small_instance(2, 2, 3, 3, 0, 5);
    const BeamformerSet w = initialize(s.ch, s.grid, s.sc);
    CHECK(w.power() == Approx(s.sc.transmit_power).epsilon(1e-12));
    const cvec b = upa_steering(angles_from_positions(s.sc.bs1(), s.grid.centroid()), s.sc.tx_array);
    CHECK(std::abs(b.dot(w.matrix().col(0))) == Approx(std::sqrt(s.sc.transmit_power) * b.norm()).epsilon(1e-12));
    CHECK(w.matrix().rightCols(3).norm() == 0.0);
}

TEST_CASE("initialize: feasible and at full power") {
    for (int users : {1, 2, 3}) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            Small s = small_instance(2, 2, 3, 3, users, seed);
            const BeamformerSet w = initialize(s.ch, s.grid, s.sc);
            CHECK(w.power() == Approx(s.sc.transmit_power).epsilon(1e-9));
            const auto sinr = comm_sinrs(w, s.ch, s.sc.ue_noise_power);
            for (int k = 0; k < users; ++k)
                CHECK(sinr[k] >= s.sc.ues[k].sinr_threshold * (1 - 1e-6));
        }
    }
}

TEST_CASE("initialize: exact budget and infeasible budget") {
    Small s = small_instance(2, 2, 3, 3, 1, 6);
    const double pmin = comm_only_beamforming(s.ch, s.sc.sinr_thresholds(), s.sc.ue_noise_power).power();
    s.sc.transmit_power = pmin;
    const BeamformerSet w = initialize(s.ch, s.grid, s.sc);
    CHECK(w.power() <= pmin * (1 + 1e-9));
    CHECK(comm_sinr(w, s.ch.h[0], 0, s.sc.ue_noise_power) >= s.sc.ues[0].sinr_threshold * (1 - 1e-6));
    s.sc.transmit_power = 0.5 * pmin;
    CHECK_THROWS_AS(initialize(s.ch, s.grid, s.sc), InfeasibleError);
}

TEST_CASE("run: single UE and single point matches the closed form") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        Small s = small_instance(2, 2, 1, 1, 1, seed);
        const cvec b0 = s.grid.tx_steering.col(0);
        const double P = s.sc.transmit_power, s2 = s.sc.ue_noise_power;
        const double gs = optimal_single(s.ch.h[0], b0, P, s2, 0.0).boundary_threshold;
        const double gm = max_feasible_sinr(s.ch.h[0], P, s2);
        for (double g : {0.5 * gs, gs + 0.5 * (gm - gs)}) {
            s.sc.ues[0].sinr_threshold = g;
            const ScaTrace t = run_sca(initialize(s.ch, s.grid, s.sc), s.ch, s.grid, s.sc);
            const double got = (t.final.matrix().adjoint() * b0).squaredNorm();
            const double want = optimal_single(s.ch.h[0], b0, P, s2, g).objective;
            CHECK(std::abs(got - want) / want <= 1e-3);
        }
    }
}

TEST_CASE("run: optimal start converges at once") {
    Small s = small_instance(2, 2, 1, 1, 1, 7);
    const cvec b0 = s.grid.tx_steering.col(0);
    s.sc.ues[0].sinr_threshold = 1.0;
    const auto cf = optimal_single(s.ch.h[0], b0, s.sc.transmit_power, s.sc.ue_noise_power, 1.0);
    cmat w = cmat::Zero(4, 4);
    w.col(0) = cf.w1 * std::polar(1.0, -std::arg(s.ch.h[0].dot(cf.w1)));
    const ScaTrace t = run_sca(BeamformerSet(w, 1, s.sc.transmit_power), s.ch, s.grid, s.sc);
    CHECK(t.iterations.size() <= 2);
    CHECK(t.termination == ScaTermination::converged);
    CHECK(t.zeta_final() == Approx(t.initial_objective).epsilon(1e-6));
}

TEST_CASE("run: monotone, feasible iterates and tight epigraph") {
    Small s = small_instance(3, 3, 5, 5, 2, 8);
    const ScaConfig cfg;
    const ScaTrace t = run_sca(initialize(s.ch, s.grid, s.sc), s.ch, s.grid, s.sc, cfg);
    REQUIRE(!t.iterations.empty());
    CHECK(t.iterates.size() == t.iterations.size());
    CHECK(t.local_points.size() == t.iterations.size());
    double prev = t.initial_objective;
    const double c_s = s.sc.sensing_constant();
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
        const auto& it = t.iterations[i];
        CHECK(it.zeta >= prev - 10 * cfg.solver.gap_tol * std::max(1.0, std::abs(prev)));
        prev = it.zeta;
        const BeamformerSet& w = t.iterates[i];
        CHECK(w.power() <= s.sc.transmit_power * (1 + 10 * cfg.solver.feasibility_tol));
        const auto sinr = comm_sinrs(w, s.ch, s.sc.ue_noise_power);
        for (int k = 0; k < 2; ++k)
            CHECK(sinr[k] >= s.sc.ues[k].sinr_threshold * (1 - 1e-6));
        CHECK(it.true_objective >= it.zeta * (1 - 1e-9));
        CHECK(it.worst_snr_db == Approx(to_db(c_s * it.true_objective)).epsilon(1e-9));
    }
    const rvec sp = steering_power(t.final, s.grid);
    double worst = 1e300;
    for (int l = 0; l < s.grid.size(); ++l) {
        CHECK(s.grid.eta(l) * t.zeta_final() <= sp(l) * (1 + 1e-9));
        worst = std::min(worst, sp(l) / s.grid.eta(l));
    }
    // epigraph is active at the worst point of the last linearization
    const BeamformerSet& local = t.local_points.back();
    double lin_worst = 1e300;
    for (int l = 0; l < s.grid.size(); ++l)
        lin_worst = std::min(lin_worst, taylor_lower_bound(local, s.grid.tx_steering.col(l)).evaluate(t.final.matrix()) /
                                            s.grid.eta(l));
    CHECK(lin_worst == Approx(t.zeta_final()).epsilon(1e-6));
    CHECK(worst == Approx(t.zeta_final()).epsilon(1e-3));
    CHECK(snr_map(t.final, s.grid, s.sc).worst_case >= c_s * t.zeta_final() * (1 - 1e-9));
}

TEST_CASE("run: plain linearization is also monotone") {
    Small s = small_instance(2, 2, 3, 3, 1, 9);
    ScaConfig cfg;
    cfg.extrapolate = false;
    cfg.max_outer_iterations = 8;
    const ScaTrace t = run_sca(initialize(s.ch, s.grid, s.sc), s.ch, s.grid, s.sc, cfg);
    double prev = t.initial_objective;
    for (const auto& it : t.iterations) {
        CHECK(!it.extrapolated);
        CHECK(it.zeta >= prev * (1 - 1e-7));
        prev = it.zeta;
    }
}

TEST_CASE("run: solver failure aborts with the partial trace") {
    Small s = small_instance(2, 2, 3, 3, 1, 10);
    int calls = 0;
    const conic::CallbackSolver flaky("flaky", [&](const conic::ConicProgram& p, const conic::SolverSettings& st) {
        if (++calls >= 3) {
            conic::SolveReport r;
            r.status = conic::SolveStatus::iteration_limit;
            return r;
        }
        return conic::solve(p, st);
    });
    ScaConfig cfg;
    cfg.backend = &flaky;
    cfg.extrapolate = false;
    try {
        run_sca(initialize(s.ch, s.grid, s.sc), s.ch, s.grid, s.sc, cfg);
        FAIL("expected abort");
    } catch (const ScaAborted& e) {
        CHECK(e.trace().iterations.size() == 2);
        CHECK(e.kind() == ErrorKind::solver_failure);
    }
}
