#include "isac/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <fmt/format.h>

#include "isac/benchmark.hpp"
#include "isac/closed_form.hpp"
#include "isac/error.hpp"
#include "isac/metrics.hpp"
#include "isac/oracle.hpp"
#include "isac/sca.hpp"
#include "isac/wavesim.hpp"

#ifndef ISAC_VERSION
#define ISAC_VERSION "0.0.0"
#endif

namespace isac {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"single", "coverage", "benchmark", "cassini", "wavesim", "oracle"};
    return names;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for '" + tmp + "'");
    }
    fs::rename(tmp, path);
}

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) { add(header); }

    void add(const std::vector<std::string>& cells) {
        if (cells.size() != cols_)
            throw std::logic_error("csv row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }
    const std::string& text() const { return text_; }

private:
    std::size_t cols_;
    std::string text_;
};

class Run {
public:
    Run(const RunOptions& opt, ExperimentConfig cfg) : opt_(opt), cfg_(std::move(cfg)), start_(clock::now()) {
        fs::create_directories(opt_.out_dir);
    }

    void write(const std::string& name, const std::string& content) {
        write_file_atomic((fs::path(opt_.out_dir) / name).string(), content);
        files_.push_back(name);
    }

    template <class Fn>
    auto stage(const std::string& name, Fn&& fn) {
        const auto t0 = clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            wall_[name] += seconds_since(t0);
        } else {
            auto r = fn();
            wall_[name] += seconds_since(t0);
            return r;
        }
    }

    json& extra() { return extra_; }
    const ExperimentConfig& cfg() const { return cfg_; }

    RunSummary finish() {
        RunSummary s;
        s.files = files_;
        s.wall_seconds = seconds_since(start_);
        json m;
        m["tool"] = "isac_cli";
        m["version"] = ISAC_VERSION;
        m["subcommand"] = opt_.subcommand;
        m["config_path"] = opt_.config_path;
        m["full"] = opt_.full;
        m["seeds"] = {{"scenario", cfg_.scenario.seed}, {"wavesim_noise", cfg_.wavesim.noise_seed}};
        m["config"] = cfg_.resolved;
        m["defaulted"] = cfg_.defaulted;
        json wall = json::object();
        for (const auto& [k, v] : wall_)
            wall[k] = v;
        wall["total"] = s.wall_seconds;
        m["wall_seconds"] = wall;
        m["files"] = files_;
        if (!extra_.is_null())
            m["details"] = extra_;
        write_file_atomic((fs::path(opt_.out_dir) / "manifest.json").string(), m.dump(2) + "\n");
        return s;
    }

private:
    using clock = std::chrono::steady_clock;
    static double seconds_since(clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    }

    RunOptions opt_;
    ExperimentConfig cfg_;
    clock::time_point start_;
    std::vector<std::string> files_;
    std::map<std::string, double> wall_;
    json extra_;
};

std::string beampattern_csv(const BeamformerSet& w, const PhiSweep& sweep, const ArrayGeometry& geom) {
    Csv csv({"theta_deg", "phi_deg", "gain", "gain_db"});
    for (double phi : sweep.phis_deg()) {
        const double g = beampattern_gain(w, {deg2rad(sweep.theta_deg), deg2rad(phi)}, geom);
        csv.add({num(sweep.theta_deg), num(phi), num(g), num(to_db(g))});
    }
    return csv.text();
}

std::string snr_map_csv(const SnrMap& map, const CoverageGrid& grid) {
    Csv csv({"index", "x_m", "y_m", "z_m", "snr", "snr_db"});
    for (int l = 0; l < grid.size(); ++l) {
        const Position& p = grid.points[l];
        csv.add({std::to_string(l), num(p.x), num(p.y), num(p.z), num(map.values(l)), num(to_db(map.values(l)))});
    }
    return csv.text();
}

std::string db_label(double db) { return fmt::format("{:g}", db); }

struct DesignStats {
    double min_db, max_db, power;
    std::vector<double> sinr_db;
};

DesignStats design_stats(const BeamformerSet& w, const SnrMap& map, const ChannelSet& channels, double sigma2) {
    DesignStats s;
    s.min_db = to_db(map.values.minCoeff());
    s.max_db = to_db(map.values.maxCoeff());
    s.power = w.power();
    for (double g : comm_sinrs(w, channels, sigma2))
        s.sinr_db.push_back(to_db(g));
    return s;
}

void add_summary_row(Csv& csv, const std::string& name, const DesignStats& s) {
    std::vector<std::string> row{name, num(s.min_db), num(s.max_db), num(s.max_db - s.min_db), num(s.power)};
    std::string sinrs;
    for (std::size_t i = 0; i < s.sinr_db.size(); ++i)
        sinrs += (i ? ";" : "") + num(s.sinr_db[i]);
    row.push_back(sinrs);
    csv.add(row);
}

CoverageGrid region_grid(const Scenario& sc) {
    CoverageGrid grid = build_coverage_grid(sc.region, sc.grid_nx, sc.grid_ny, sc);
    eta_weights(grid, sc);
    return grid;
}

void run_single(Run& run) {
    const ExperimentConfig& cfg = run.cfg();
    const Scenario& sc = cfg.scenario;
    const SingleSettings& st = cfg.single;
    const Position q0 = place(sc.bs1(), st.sensing_angles, st.sensing_range);
    const cvec b0 = upa_steering(angles_from_positions(sc.bs1(), q0), sc.tx_array);
    const ChannelSet channels = generate_rician_channels({st.ue}, sc, sc.seed);
    const cvec& h = channels.h[0];
    const int M = sc.tx_antennas();

    Csv summary({"sinr_db", "status", "regime", "boundary_db", "objective", "sca_objective", "sca_rel_diff",
                 "sensing_snr_db", "ue_sinr_db"});
    CoverageGrid point = grid_from_points({q0}, sc);
    eta_weights(point, sc);
    json sca_wall = json::array();
    for (double db : st.sinr_db) {
        const double gamma = from_db(db);
        SinglePointSolution sol;
        try {
            sol = optimal_single(h, b0, sc.transmit_power, sc.ue_noise_power, gamma);
        } catch (const InfeasibleError&) {
            summary.add({num(db), "infeasible", "", "", "", "", "", "", ""});
            continue;
        }
        cmat W = cmat::Zero(M, M);
        W.col(0) = sol.w1;
        const BeamformerSet w(W, 1, sc.transmit_power * (1.0 + 1e-12));
        run.write("beampattern_single_" + db_label(db) + "dB.csv", beampattern_csv(w, st.sweep, sc.tx_array));

        std::string sca_obj, sca_diff;
        if (st.cross_check_sca) {
            Scenario s1 = sc;
            UePlacement ue = st.ue;
            ue.sinr_threshold = gamma;
            s1.ues = {ue};
            const ScaTrace trace = run.stage("sca", [&] {
                const BeamformerSet init = initialize(channels, point, s1, cfg.sca.solver);
                return run_sca(init, channels, point, s1, cfg.sca);
            });
            const double obj = (trace.final.matrix().adjoint() * b0).squaredNorm();
            sca_obj = num(obj);
            sca_diff = num(std::abs(obj - sol.objective) / sol.objective);
        }
        summary.add({num(db), "optimal", to_string(sol.regime), num(to_db(sol.boundary_threshold)),
                     num(sol.objective), sca_obj, sca_diff, num(to_db(sensing_snr(w, q0, sc))),
                     num(to_db(comm_sinr(w, h, 0, sc.ue_noise_power)))});
    }
    run.write("single_summary.csv", summary.text());
}

void run_coverage(Run& run, bool with_proposed) {
    const ExperimentConfig& cfg = run.cfg();
    const Scenario& sc = cfg.scenario;
    const ChannelSet channels = generate_rician_channels(sc);
    const CoverageGrid grid = run.stage("grid", [&] { return region_grid(sc); });
    const double sigma2 = sc.ue_noise_power;

    Csv summary({"design", "min_snr_db", "max_snr_db", "spread_db", "power_w", "ue_sinr_db"});
    if (with_proposed) {
        const ScaTrace trace = run.stage("sca", [&] {
            const BeamformerSet init = initialize(channels, grid, sc, cfg.sca.solver);
            return run_sca(init, channels, grid, sc, cfg.sca);
        });
        Csv tcsv({"iteration", "zeta", "true_objective", "worst_snr_db", "solver_iterations", "solver_gap"});
        tcsv.add({"0", "", num(trace.initial_objective), num(to_db(sc.sensing_constant() * trace.initial_objective)),
                  "", ""});
        json walls = json::array();
        for (const auto& it : trace.iterations) {
            tcsv.add({std::to_string(it.index), num(it.zeta), num(it.true_objective), num(it.worst_snr_db),
                      std::to_string(it.solver_iterations), num(it.solver_gap)});
            walls.push_back(it.wall_seconds);
        }
        run.extra()["sca_iteration_wall_seconds"] = walls;
        run.extra()["sca_termination"] = to_string(trace.termination);
        run.write("sca_trace.csv", tcsv.text());

        const SnrMap map = snr_map(trace.final, grid, sc);
        run.write("snr_map_proposed.csv", snr_map_csv(map, grid));
        run.write("beampattern_proposed.csv", beampattern_csv(trace.final, cfg.coverage.sweep, sc.tx_array));
        add_summary_row(summary, "proposed", design_stats(trace.final, map, channels, sigma2));
    }

    const BeamformerSet bench = run.stage("benchmark", [&] {
        return comm_only_beamforming(channels, sc.sinr_thresholds(), sigma2, cfg.sca.solver);
    });
    if (bench.power() > sc.transmit_power * (1.0 + 1e-9))
        throw InfeasibleError("benchmark needs " + num(bench.power()) + " W, budget is " + num(sc.transmit_power) + " W");
    const SnrMap bmap = snr_map(bench, grid, sc);
    run.write("snr_map_benchmark.csv", snr_map_csv(bmap, grid));
    run.write("beampattern_benchmark.csv", beampattern_csv(bench, cfg.coverage.sweep, sc.tx_array));
    add_summary_row(summary, "benchmark", design_stats(bench, bmap, channels, sigma2));
    run.write(with_proposed ? "coverage_summary.csv" : "benchmark_summary.csv", summary.text());
}

void run_cassini(Run& run) {
    const ExperimentConfig& cfg = run.cfg();
    const Scenario& sc = cfg.scenario;
    const CoverageGrid grid = region_grid(sc);
    const BeamformerSet iso = isotropic_beamformer(sc.tx_antennas(), sc.transmit_power);
    const SnrMap map = snr_map(iso, grid, sc);
    run.write("snr_map_isotropic.csv", snr_map_csv(map, grid));

    std::vector<double> levels = cfg.cassini.levels_db;
    if (levels.empty()) {
        const double lo = to_db(map.values.minCoeff()), hi = to_db(map.values.maxCoeff());
        for (int i = 1; i <= 5; ++i)
            levels.push_back(lo + (hi - lo) * i / 6.0);
    }
    const auto contours = run.stage("contours", [&] { return cassini_contours(sc, levels, grid); });
    Csv csv({"level_db", "index", "x_m", "y_m", "range_product_m2"});
    for (const auto& c : contours) {
        for (int l : c.indices) {
            const Position& p = grid.points[l];
            csv.add({num(c.level_db), std::to_string(l), num(p.x), num(p.y),
                     num(distance(p, sc.bs1()) * distance(p, sc.bs2()))});
        }
    }
    run.write("cassini_contours.csv", csv.text());
}

void run_wavesim(Run& run) {
    const ExperimentConfig& cfg = run.cfg();
    const Scenario& sc = cfg.scenario;
    const WavesimSettings& ws = cfg.wavesim;
    const int M = sc.tx_antennas();
    const cvec b = upa_steering(angles_from_positions(sc.bs1(), ws.point), sc.tx_array);
    cmat single = cmat::Zero(M, M);
    single.col(0) = std::sqrt(sc.transmit_power) * b / b.norm();
    const std::vector<std::pair<std::string, BeamformerSet>> beams{
        {"isotropic", isotropic_beamformer(M, sc.transmit_power)},
        {"single", BeamformerSet(single, 0, sc.transmit_power * (1.0 + 1e-12))}};

    Csv csv({"beam", "n_samples", "trials", "analytic_db", "empirical_db", "gap_db", "projected_db"});
    for (int n : ws.n_samples) {
        const WaveformEnsemble ens = generate_waveforms(0, M, n, sc.seed);
        for (const auto& [name, w] : beams) {
            const MatchedFilterResult r = run.stage("wavesim", [&] {
                return matched_filter_snr(w, ws.point, ens, sc, ws.noise_seed, ws.trials);
            });
            const double a = to_db(r.analytic_snr), e = to_db(r.empirical_snr);
            csv.add({name, std::to_string(n), std::to_string(ws.trials), num(a), num(e), num(e - a),
                     num(to_db(r.projected_snr))});
        }
    }
    run.write("wavesim.csv", csv.text());
}

void run_oracle(Run& run) {
    const ExperimentConfig& cfg = run.cfg();
    const OracleSettings& os = cfg.oracle;
    Scenario sc = cfg.scenario;
    sc.tx_array = {2, 1, sc.tx_array.spacing_over_wavelength};
    UePlacement ue = sc.ues.empty() ? cfg.single.ue : sc.ues.front();
    ue.sinr_threshold = from_db(os.sinr_db);
    sc.ues = {ue};
    const ChannelSet channels = generate_rician_channels(sc);

    std::vector<Position> pts;
    for (std::size_t i = 0; i < os.point_angles.size(); ++i)
        pts.push_back(place(sc.bs1(), os.point_angles[i], os.point_ranges[i]));
    CoverageGrid grid = grid_from_points(pts, sc);
    eta_weights(grid, sc);

    OracleProblem pr;
    pr.h = channels.h[0];
    for (int l = 0; l < grid.size(); ++l)
        pr.b.push_back(grid.tx_steering.col(l));
    pr.eta = grid.eta;
    pr.gamma_bar = ue.sinr_threshold;
    pr.sigma2 = sc.ue_noise_power;
    CovarianceGridSpec spec;
    spec.dimension = 2;
    spec.power = sc.transmit_power;
    spec.step = os.step_fraction * sc.transmit_power;

    const OracleResult orc = run.stage("oracle", [&] { return covariance_grid_search(spec, pr); });
    if (!orc.feasible)
        throw InfeasibleError("no lattice covariance meets the SINR target");
    const ScaTrace trace = run.stage("sca", [&] {
        return run_sca(initialize(channels, grid, sc, cfg.sca.solver), channels, grid, sc, cfg.sca);
    });
    const double sca_obj = coverage_objective(trace.final.matrix(), grid);
    std::string cf;
    if (grid.size() == 1) {
        const SinglePointSolution sol =
            optimal_single(pr.h, pr.b[0], sc.transmit_power, sc.ue_noise_power, pr.gamma_bar);
        cf = num(sol.objective / grid.eta(0));
    }
    Csv csv({"points", "oracle_objective", "oracle_cell_tolerance", "sca_objective", "sca_over_oracle",
             "closed_form_objective"});
    csv.add({std::to_string(grid.size()), num(orc.objective), num(orc.cell_tolerance), num(sca_obj),
             num(sca_obj / orc.objective), cf});
    run.write("oracle.csv", csv.text());
}

}  // namespace

RunSummary run_experiment(const RunOptions& options) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), options.subcommand) == names.end())
        throw ValidationError("unknown subcommand '" + options.subcommand + "'");
    ExperimentConfig cfg = options.config_path.empty()
                               ? parse_config(json::object(), options.full, options.seed)
                               : load_config_file(options.config_path, options.full, options.seed);
    Run run(options, std::move(cfg));
    if (options.subcommand == "single")
        run_single(run);
    else if (options.subcommand == "coverage")
        run_coverage(run, true);
    else if (options.subcommand == "benchmark")
        run_coverage(run, false);
    else if (options.subcommand == "cassini")
        run_cassini(run);
    else if (options.subcommand == "wavesim")
        run_wavesim(run);
    else
        run_oracle(run);
    return run.finish();
}

int run_cli(const RunOptions& options) {
    int code = exit_ok;
    std::string kind, message;
    json trace_info;
    try {
        const RunSummary s = run_experiment(options);
        std::cout << fmt::format("{}: wrote {} files to {} in {:.2f} s\n", options.subcommand, s.files.size(),
                                 options.out_dir, s.wall_seconds);
        return exit_ok;
    } catch (const ScaAborted& e) {
        code = exit_solver;
        kind = "solver_failure";
        message = e.what();
        for (const auto& it : e.trace().iterations)
            trace_info.push_back({{"iteration", it.index}, {"zeta", it.zeta}, {"worst_snr_db", it.worst_snr_db}});
    } catch (const Error& e) {
        message = e.what();
        switch (e.kind()) {
        case ErrorKind::validation:
            code = exit_validation, kind = "validation";
            break;
        case ErrorKind::degenerate:
            code = exit_validation, kind = "degenerate_geometry";
            break;
        case ErrorKind::infeasible:
            code = exit_infeasible, kind = "infeasible";
            break;
        case ErrorKind::solver_failure:
            code = exit_solver, kind = "solver_failure";
            break;
        }
    } catch (const std::exception& e) {
        code = exit_crash;
        kind = "internal";
        message = e.what();
    }
    std::cerr << "error (" << kind << "): " << message << "\n";
    try {
        fs::create_directories(options.out_dir);
        json rep{{"subcommand", options.subcommand}, {"kind", kind}, {"message", message}, {"exit_code", code}};
        if (!trace_info.is_null())
            rep["completed_iterations"] = trace_info;
        write_file_atomic((fs::path(options.out_dir) / "error_report.json").string(), rep.dump(2) + "\n");
    } catch (...) {
    }
    return code;
}

}  // namespace isac
