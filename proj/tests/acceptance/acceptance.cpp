#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "../common/socp_suite.hpp"
#include "isac/benchmark.hpp"
#include "isac/channels.hpp"
#include "isac/closed_form.hpp"
#include "isac/metrics.hpp"
#include "isac/oracle.hpp"
#include "isac/rng.hpp"
#include "isac/sca.hpp"
#include "isac/wavesim.hpp"

using namespace isac;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string cli_path;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Scenario with_array(int mx, int mz) {
    Scenario sc = desk_scenario();
    sc.tx_array = {mx, mz, 0.5};
    return sc;
}

UePlacement random_ue(Rng& rng, double gamma) {
    UePlacement ue;
    ue.angles = {deg2rad(60.0 + 60.0 * rng.uniform()), deg2rad(20.0 + 140.0 * rng.uniform())};
    ue.range = 20.0 + 40.0 * rng.uniform();
    ue.sinr_threshold = gamma;
    return ue;
}

Position random_region_point(Rng& rng, const Scenario& sc) {
    const RegionSpec& r = sc.region;
    return {r.center_x + r.extent_x * (rng.uniform() - 0.5), r.center_y + r.extent_y * (rng.uniform() - 0.5),
            r.height * rng.uniform()};
}

double sca_single_objective(const Scenario& sc, const ChannelSet& ch, const Position& q0, double gamma,
                            const cvec& b0) {
    Scenario s1 = sc;
    s1.ues = {UePlacement{{}, 30.0, gamma}};
    CoverageGrid grid = grid_from_points({q0}, s1);
    eta_weights(grid, s1);
    const BeamformerSet init = initialize(ch, grid, s1);
    const ScaTrace t = run_sca(init, ch, grid, s1);
    return (t.final.matrix().adjoint() * b0).squaredNorm();
}

Outcome criterion_1() {
    double worst = 0.0;
    int runs = 0, comm = 0, sens = 0;
    for (auto [mx, mz] : {std::pair{2, 2}, std::pair{4, 4}}) {
        const Scenario sc = with_array(mx, mz);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            Rng rng(seed, 77);
            const UePlacement ue = random_ue(rng, 1.0);
            const Position q0 = random_region_point(rng, sc);
            const cvec b0 = upa_steering(angles_from_positions(sc.bs1(), q0), sc.tx_array);
            const ChannelSet ch = generate_rician_channels({ue}, sc, seed);
            const double P = sc.transmit_power, s2 = sc.ue_noise_power;
            const double g_star = optimal_single(ch.h[0], b0, P, s2, 0.0).boundary_threshold;
            const double g_max = max_feasible_sinr(ch.h[0], P, s2);
            for (double g : {0.1 * g_star, 0.8 * g_star, g_star + 0.3 * (g_max - g_star),
                             g_star + 0.8 * (g_max - g_star)}) {
                const SinglePointSolution cf = optimal_single(ch.h[0], b0, P, s2, g);
                (cf.regime == Regime::comm_limited ? comm : sens)++;
                worst = std::max(worst, rel(sca_single_objective(sc, ch, q0, g, b0), cf.objective));
                ++runs;
            }
        }
    }
    return {worst <= 1e-3 && comm > 0 && sens > 0,
            fmt::format("{} runs ({} sensing-limited, {} comm-limited), worst relative gap {:.3g}", runs, sens, comm,
                        worst)};
}

Outcome criterion_2() {
    double worst_ratio = 1e300, worst_cf = 0.0;
    int cf_fail = 0, n = 0;
    for (int L = 1; L <= 3; ++L) {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Scenario sc = with_array(2, 1);
            Rng rng(seed, 100 + L);
            UePlacement ue = random_ue(rng, 1.0);
            const ChannelSet ch = generate_rician_channels({ue}, sc, seed);
            const double gmax = max_feasible_sinr(ch.h[0], sc.transmit_power, sc.ue_noise_power);
            ue.sinr_threshold = (0.2 + 0.6 * rng.uniform()) * gmax;
            sc.ues = {ue};
            std::vector<Position> pts;
            for (int l = 0; l < L; ++l)
                pts.push_back(random_region_point(rng, sc));
            CoverageGrid grid = grid_from_points(pts, sc);
            eta_weights(grid, sc);

            OracleProblem pr;
            pr.h = ch.h[0];
            for (int l = 0; l < L; ++l)
                pr.b.push_back(grid.tx_steering.col(l));
            pr.eta = grid.eta;
            pr.gamma_bar = ue.sinr_threshold;
            pr.sigma2 = sc.ue_noise_power;
            CovarianceGridSpec spec;
            spec.power = sc.transmit_power;
            const OracleResult orc = covariance_grid_search(spec, pr);
            if (!orc.feasible)
                return {false, fmt::format("oracle infeasible for L={} seed={}", L, seed)};

            const ScaTrace t = run_sca(initialize(ch, grid, sc), ch, grid, sc);
            const double sca = coverage_objective(t.final.matrix(), grid);
            worst_ratio = std::min(worst_ratio, sca / orc.objective);
            if (L == 1) {
                const SinglePointSolution cf =
                    optimal_single(pr.h, pr.b[0], sc.transmit_power, sc.ue_noise_power, pr.gamma_bar);
                const double d = std::abs(cf.objective / grid.eta(0) - orc.objective);
                worst_cf = std::max(worst_cf, d / orc.cell_tolerance);
                if (d > orc.cell_tolerance)
                    ++cf_fail;
            }
            ++n;
        }
    }
    return {worst_ratio >= 0.95 && cf_fail == 0,
            fmt::format("{} instances, min SCA/oracle {:.4f}, closed form off by at most {:.3f} cells", n,
                        worst_ratio, worst_cf)};
}

Outcome criterion_3() {
    const Scenario sc = desk_scenario();
    const ChannelSet ch = generate_rician_channels(sc);
    CoverageGrid grid = build_coverage_grid(sc.region, sc.grid_nx, sc.grid_ny, sc);
    eta_weights(grid, sc);
    const BeamformerSet init = initialize(ch, grid, sc);
    const ScaConfig cfg;
    const ScaTrace t = run_sca(init, ch, grid, sc, cfg);
    const double slack = 10.0 * cfg.solver.gap_tol;
    std::vector<std::string> bad;
    double prev = -1e300;
    const auto th = sc.sinr_thresholds();
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
        const double z = t.iterations[i].zeta;
        if (z < prev - slack * std::abs(prev))
            bad.push_back(fmt::format("zeta decreased at {}", i + 1));
        prev = z;
        const BeamformerSet& w = t.iterates[i];
        const auto s = comm_sinrs(w, ch, sc.ue_noise_power);
        for (std::size_t k = 0; k < s.size(); ++k)
            if (s[k] < th[k] * (1.0 - 1e-4))
                bad.push_back(fmt::format("SINR {} violated at {}", k, i + 1));
        if (w.power() > sc.transmit_power * (1.0 + 1e-6))
            bad.push_back(fmt::format("power violated at {}", i + 1));
    }
    const std::size_t n = t.iterations.size();
    if (n == 0)
        return {false, "no SCA iterations"};
    const BeamformerSet& before = t.local_points.back();
    double lin = 1e300;
    for (int l = 0; l < grid.size(); ++l) {
        const TaylorBound tb = taylor_lower_bound(before, grid.tx_steering.col(l));
        lin = std::min(lin, tb.evaluate(t.final.matrix()) / grid.eta(l));
    }
    const double tight = rel(lin, t.zeta_final());
    if (tight > 1e-6)
        bad.push_back(fmt::format("epigraph slack {:.3g}", tight));
    return {bad.empty() && n > 0,
            fmt::format("{} iterations ({}), epigraph slack {:.3g}{}", n, to_string(t.termination), tight,
                        bad.empty() ? "" : "; " + bad.front())};
}

Outcome criterion_4() {
    const Scenario sc = desk_scenario();
    const ChannelSet ch = generate_rician_channels(sc);
    CoverageGrid grid = build_coverage_grid(sc.region, sc.grid_nx, sc.grid_ny, sc);
    eta_weights(grid, sc);
    const ScaTrace t = run_sca(initialize(ch, grid, sc), ch, grid, sc);
    const BeamformerSet bench = comm_only_beamforming(ch, sc.sinr_thresholds(), sc.ue_noise_power);
    const SnrMap p = snr_map(t.final, grid, sc), b = snr_map(bench, grid, sc);
    const double pmin = to_db(p.values.minCoeff()), bmin = to_db(b.values.minCoeff());
    const double pspread = to_db(p.values.maxCoeff()) - pmin, bspread = to_db(b.values.maxCoeff()) - bmin;
    return {pmin > bmin && pspread < bspread,
            fmt::format("min SNR {:.2f} dB vs {:.2f} dB, spread {:.2f} dB vs {:.2f} dB", pmin, bmin, pspread,
                        bspread)};
}

Outcome criterion_5() {
    const Scenario sc = desk_scenario();
    const Position q{0.0, 50.0, 10.0};
    const int M = sc.tx_antennas();
    const cvec b = upa_steering(angles_from_positions(sc.bs1(), q), sc.tx_array);
    cmat single = cmat::Zero(M, M);
    single.col(0) = std::sqrt(sc.transmit_power) * b / b.norm();
    const WaveformEnsemble ens = generate_waveforms(0, M, 4096, sc.seed);
    double worst = 0.0;
    std::string parts;
    for (const auto& [name, w] : {std::pair{std::string("isotropic"), isotropic_beamformer(M, sc.transmit_power)},
                                  std::pair{std::string("single"), BeamformerSet(single, 0)}}) {
        const MatchedFilterResult r = matched_filter_snr(w, q, ens, sc, 7, 100);
        const double gap = std::abs(to_db(r.empirical_snr) - to_db(r.analytic_snr));
        worst = std::max(worst, gap);
        parts += fmt::format(" {} {:.3f} dB", name, gap);
    }
    return {worst < 0.5, "gap:" + parts};
}

Position equal_product_partner(const Position& p1, const Scenario& sc, Rng& rng) {
    const double c = distance(p1, sc.bs1()) * distance(p1, sc.bs2());
    const double D = sc.inter_bs_distance;
    double ux, uy, uz, nrm;
    do {
        ux = 2 * rng.uniform() - 1, uy = 2 * rng.uniform() - 1, uz = 2 * rng.uniform() - 1;
        nrm = std::sqrt(ux * ux + uy * uy + uz * uz);
    } while (nrm < 0.1 || nrm > 1.0);
    ux /= nrm, uy /= nrm, uz /= nrm;
    auto f = [&](double r) { return r * std::sqrt(r * r + D * D - 2 * r * D * uy) - c; };
    double lo = 0.0, hi = 1.0;
    while (f(hi) < 0)
        hi *= 2;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0 ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    return sc.bs1() + Position{r * ux, r * uy, r * uz};
}

Outcome criterion_6() {
    const Scenario sc = desk_scenario();
    const BeamformerSet iso = isotropic_beamformer(sc.tx_antennas(), sc.transmit_power);
    Rng rng(2024, 6);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Position p1 = random_region_point(rng, sc);
        const Position p2 = equal_product_partner(p1, sc, rng);
        worst = std::max(worst, rel(sensing_snr(iso, p2, sc), sensing_snr(iso, p1, sc)));
    }

    CoverageGrid grid = build_coverage_grid(sc.region, 41, 41, sc);
    const Position ref{0.0, 50.0, sc.region.height};
    const double ref_snr = isotropic_sensing_snr(ref, sc);
    const double ref_prod = distance(ref, sc.bs1()) * distance(ref, sc.bs2());
    std::vector<double> levels;
    for (double d : {-2.0, -4.0, -6.0})
        levels.push_back(to_db(ref_snr) + d);
    const auto contours = cassini_contours(sc, levels, grid);
    int loci = 0, off = 0;
    for (const auto& lev : contours) {
        const double target = ref_prod * std::sqrt(ref_snr / from_db(lev.level_db));
        for (int idx : lev.indices) {
            ++loci;
            const Position& p = grid.points[idx];
            double lo = 1e300, hi = -1e300;
            for (int a = -4; a <= 4; ++a)
                for (int b = -4; b <= 4; ++b) {
                    const Position s{p.x + a * grid.spacing_x / 8.0, p.y + b * grid.spacing_y / 8.0, p.z};
                    const double prod = distance(s, sc.bs1()) * distance(s, sc.bs2());
                    lo = std::min(lo, prod), hi = std::max(hi, prod);
                }
            if (target < lo || target > hi)
                ++off;
        }
    }
    return {worst <= 1e-9 && loci > 0 && off == 0,
            fmt::format("equal-product SNR mismatch {:.3g}, {} contour points, {} off-locus", worst, loci, off)};
}

Outcome criterion_7() {
    double jump = 0.0, inv = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed, 7);
        const int M = 16;
        cvec h(M), b(M);
        for (int i = 0; i < M; ++i)
            h(i) = rng.complex_normal(), b(i) = std::polar(1.0, 6.283185307179586 * rng.uniform());
        const double P = 0.1 + rng.uniform(), s2 = 0.01 + rng.uniform();
        const double gs = optimal_single(h, b, P, s2, 0.0).boundary_threshold;
        const double gm = max_feasible_sinr(h, P, s2);
        const double below = optimal_single(h, b, P, s2, gs * (1 - 1e-12)).objective;
        const double at = optimal_single(h, b, P, s2, gs).objective;
        const double above = optimal_single(h, b, P, s2, gs * (1 + 1e-12)).objective;
        jump = std::max({jump, rel(below, at), rel(above, at)});
        for (int i = 0; i <= 40; ++i) {
            const double g = gm * i / 40.0 * (1 - 1e-9);
            const SinglePointSolution s = optimal_single(h, b, P, s2, g);
            inv = std::max(inv, rel(s.w1.squaredNorm(), P));
            const double sinr = std::norm(h.dot(s.w1)) / s2;
            if (s.regime == Regime::comm_limited)
                inv = std::max(inv, rel(sinr, g));
            else if (sinr < g * (1 - 1e-9))
                inv = std::max(inv, rel(sinr, g));
        }
    }
    return {jump < 1e-9 && inv <= 1e-9,
            fmt::format("max jump {:.3g}, max invariant error {:.3g}", jump, inv)};
}

Outcome criterion_8() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed, 8);
        const int M = 16;
        const double s2 = 1e-12;
        cvec h1(M), r(M);
        for (int i = 0; i < M; ++i)
            h1(i) = 1e-3 * rng.complex_normal(), r(i) = 1e-3 * rng.complex_normal();
        const double g1 = from_db(20), g2 = from_db(15);
        ChannelSet one;
        one.h = {h1};
        const BeamformerSet w1 = comm_only_beamforming(one, {g1}, s2);
        worst = std::max(worst, rel(w1.power(), s2 * g1 / h1.squaredNorm()));

        const cvec h2 = r - h1 * (h1.dot(r) / h1.squaredNorm());
        ChannelSet two;
        two.h = {h1, h2};
        const BeamformerSet w2 = comm_only_beamforming(two, {g1, g2}, s2);
        worst = std::max(worst, rel(w2.power(), s2 * g1 / h1.squaredNorm() + s2 * g2 / h2.squaredNorm()));
    }
    return {worst <= 1e-6, fmt::format("worst relative power error {:.3g}", worst)};
}

Outcome criterion_9() {
    int ok = 0, total = 0;
    double worst = 0.0;
    std::string failed;
    for (const auto& t : testing::analytic_socp_suite()) {
        ++total;
        const conic::SolveReport r = conic::solve(t.program);
        const double err = std::abs(r.objective_value - t.optimum) / std::max(1.0, std::abs(t.optimum));
        worst = std::max(worst, err);
        if (r.status == conic::SolveStatus::optimal && err <= 1e-6)
            ++ok;
        else if (failed.empty())
            failed = "; first failure: " + t.name;
    }
    return {total >= 10 && ok == total,
            fmt::format("{}/{} optimal, worst objective error {:.3g}{}", ok, total, worst, failed)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome criterion_10() {
    if (cli_path.empty())
        return {false, "CLI path not given"};
    const fs::path base = fs::temp_directory_path() / fmt::format("isac_determinism_{}", std::rand());
    fs::remove_all(base);
    const fs::path a = base / "a", b = base / "b";
    const std::string ca = fmt::format("\"{}\" coverage --out \"{}\" --seed 11 > /dev/null", cli_path, a.string());
    const std::string cb =
        fmt::format("ISAC_THREADS=4 \"{}\" coverage --out \"{}\" --seed 11 > /dev/null", cli_path, b.string());
    if (std::system(ca.c_str()) != 0 || std::system(cb.c_str()) != 0)
        return {false, "coverage run failed"};
    int files = 0, diff = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv")
            continue;
        ++files;
        if (slurp(e.path()) != slurp(b / e.path().filename()))
            ++diff;
    }
    fs::remove_all(base);
    return {files > 0 && diff == 0, fmt::format("{} data files compared, {} differ", files, diff)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1)
        cli_path = argv[1];
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"single-point optimum matches SCA", criterion_1},
        {"SCA versus covariance lattice oracle", criterion_2},
        {"SCA monotone, feasible, epigraph tight", criterion_3},
        {"coverage beats communication-only benchmark", criterion_4},
        {"matched filter agrees with analytic SNR", criterion_5},
        {"isotropic iso-SNR loci are Cassini ovals", criterion_6},
        {"closed form continuous across regimes", criterion_7},
        {"benchmark matches closed forms", criterion_8},
        {"analytic SOCP suite", criterion_9},
        {"coverage output deterministic", criterion_10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass)
            ++failed;
        std::cout << fmt::format("{} [{:2}] {}: {} ({:.1f} s)", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                                 o.detail, secs)
                  << std::endl;
    }
    std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
