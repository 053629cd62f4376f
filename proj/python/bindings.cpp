#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "isac/benchmark.hpp"
#include "isac/closed_form.hpp"
#include "isac/config.hpp"
#include "isac/error.hpp"
#include "isac/experiment.hpp"
#include "isac/oracle.hpp"
#include "isac/sca.hpp"
#include "isac/wavesim.hpp"

namespace py = pybind11;
using namespace isac;

namespace {

Scenario scenario_from(const py::object& config, bool full) {
    if (config.is_none())
        return full ? full_scenario() : desk_scenario();
    const auto json_mod = py::module_::import("json");
    const std::string text = py::str(json_mod.attr("dumps")(config));
    return parse_config(nlohmann::json::parse(text), full, std::nullopt).scenario;
}

py::dict coverage_run(const py::object& config, bool full, const ScaConfig& sca) {
    const Scenario sc = scenario_from(config, full);
    const ChannelSet ch = generate_rician_channels(sc);
    CoverageGrid grid = build_coverage_grid(sc.region, sc.grid_nx, sc.grid_ny, sc);
    eta_weights(grid, sc);
    const BeamformerSet bench = comm_only_beamforming(ch, sc.sinr_thresholds(), sc.ue_noise_power, sca.solver);
    const BeamformerSet init = initialize(ch, grid, sc, sca.solver);
    ScaTrace trace;
    {
        py::gil_scoped_release release;
        trace = run_sca(init, ch, grid, sc, sca);
    }
    std::vector<double> zeta, worst_db;
    for (const auto& it : trace.iterations) {
        zeta.push_back(it.zeta);
        worst_db.push_back(it.worst_snr_db);
    }
    Eigen::MatrixXd pts(grid.size(), 3);
    for (int l = 0; l < grid.size(); ++l)
        pts.row(l) << grid.points[l].x, grid.points[l].y, grid.points[l].z;
    py::dict out;
    out["w"] = trace.final.matrix();
    out["w_benchmark"] = bench.matrix();
    out["zeta"] = zeta;
    out["worst_snr_db"] = worst_db;
    out["converged"] = trace.termination == ScaTermination::converged;
    out["points"] = pts;
    out["snr_proposed"] = snr_map(trace.final, grid, sc).values;
    out["snr_benchmark"] = snr_map(bench, grid, sc).values;
    out["sinr"] = comm_sinrs(trace.final, ch, sc.ue_noise_power);
    out["sinr_thresholds"] = sc.sinr_thresholds();
    out["channels"] = ch.h;
    return out;
}

}  // namespace

PYBIND11_MODULE(_isac, m) {
    m.doc() = "Bi-static ISAC coverage beamforming";
    m.attr("__version__") = ISAC_VERSION;

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DegenerateGeometryError>(m, "DegenerateGeometryError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    m.def("upa_steering",
          [](double theta, double phi, int m_x, int m_z, double spacing) {
              return upa_steering({theta, phi}, {m_x, m_z, spacing});
          },
          py::arg("theta"), py::arg("phi"), py::arg("m_x"), py::arg("m_z"), py::arg("spacing") = 0.5);

    m.def("angles_from_positions",
          [](std::array<double, 3> s, std::array<double, 3> t) {
              const auto a = angles_from_positions({s[0], s[1], s[2]}, {t[0], t[1], t[2]});
              return std::pair{a.theta, a.phi};
          },
          py::arg("source"), py::arg("target"));

    m.def("comm_sinr",
          [](const cmat& w, int k_comm, const cvec& h, int k, double sigma2) {
              return comm_sinr(BeamformerSet(w, k_comm), h, k, sigma2);
          },
          py::arg("w"), py::arg("k_comm"), py::arg("h"), py::arg("k"), py::arg("sigma2"));

    m.def("sensing_snr",
          [](const cmat& w, std::array<double, 3> q, const py::object& config, bool full) {
              return sensing_snr(BeamformerSet(w, 0), {q[0], q[1], q[2]}, scenario_from(config, full));
          },
          py::arg("w"), py::arg("q"), py::arg("config") = py::none(), py::arg("full") = false);

    m.def("optimal_single",
          [](const cvec& h, const cvec& b0, double power, double sigma2, double gamma_bar) {
              const auto s = optimal_single(h, b0, power, sigma2, gamma_bar);
              py::dict out;
              out["w"] = s.w1;
              out["regime"] = std::string(to_string(s.regime));
              out["boundary_threshold"] = s.boundary_threshold;
              out["objective"] = s.objective;
              return out;
          },
          py::arg("h"), py::arg("b0"), py::arg("power"), py::arg("sigma2"), py::arg("gamma_bar"));

    m.def("comm_only_beamforming",
          [](const std::vector<cvec>& h, const std::vector<double>& gamma_bars, double sigma2) {
              ChannelSet ch;
              ch.h = h;
              return comm_only_beamforming(ch, gamma_bars, sigma2).matrix();
          },
          py::arg("h"), py::arg("gamma_bars"), py::arg("sigma2"));

    m.def("oracle_single_ue",
          [](const cvec& h, const std::vector<cvec>& b, const rvec& eta, double gamma_bar, double sigma2,
             double power, double step) {
              OracleProblem p{h, b, eta, gamma_bar, sigma2};
              const auto r = covariance_grid_search({static_cast<int>(h.size()), power, step}, p);
              py::dict out;
              out["feasible"] = r.feasible;
              out["objective"] = r.objective;
              out["covariance"] = r.best;
              out["cell_tolerance"] = r.cell_tolerance;
              return out;
          },
          py::arg("h"), py::arg("b"), py::arg("eta"), py::arg("gamma_bar"), py::arg("sigma2"), py::arg("power"),
          py::arg("step") = 0.0);

    m.def("coverage",
          [](const py::object& config, bool full, double epsilon, int max_outer_iterations, bool extrapolate) {
              ScaConfig sca;
              sca.epsilon = epsilon;
              sca.max_outer_iterations = max_outer_iterations;
              sca.extrapolate = extrapolate;
              return coverage_run(config, full, sca);
          },
          py::arg("config") = py::none(), py::arg("full") = false, py::arg("epsilon") = ScaConfig{}.epsilon,
          py::arg("max_outer_iterations") = ScaConfig{}.max_outer_iterations,
          py::arg("extrapolate") = ScaConfig{}.extrapolate);

    m.def("wavesim_isotropic",
          [](int n_samples, int trials, std::array<double, 3> q, std::uint64_t seed, const py::object& config) {
              const Scenario sc = scenario_from(config, false);
              const auto ens = generate_waveforms(0, sc.tx_antennas(), n_samples, seed);
              const auto r = matched_filter_snr(isotropic_beamformer(sc.tx_antennas(), sc.transmit_power),
                                                {q[0], q[1], q[2]}, ens, sc, seed + 1, trials);
              return std::pair{r.analytic_snr, r.empirical_snr};
          },
          py::arg("n_samples") = 4096, py::arg("trials") = 100, py::arg("q") = std::array<double, 3>{0, 50, 10},
          py::arg("seed") = 1, py::arg("config") = py::none());

    m.def("run_cli",
          [](const std::string& subcommand, const std::string& config_path, const std::string& out_dir,
             std::optional<std::uint64_t> seed, bool full) {
              RunOptions o{subcommand, config_path, out_dir, seed, full};
              py::gil_scoped_release release;
              return run_cli(o);
          },
          py::arg("subcommand"), py::arg("config_path") = "", py::arg("out_dir") = "out",
          py::arg("seed") = py::none(), py::arg("full") = false);

    m.def("default_config", [](bool full) {
        const auto json_mod = py::module_::import("json");
        return json_mod.attr("loads")(default_config_document(full).dump());
    }, py::arg("full") = false);
}
