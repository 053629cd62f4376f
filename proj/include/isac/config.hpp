#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "isac/sca.hpp"
#include "isac/scenario.hpp"

namespace isac {

struct PhiSweep {
    double theta_deg = 90.0;
    double phi_start_deg = 0.0;
    double phi_stop_deg = 180.0;
    int count = 361;

    std::vector<double> phis_deg() const;
};

struct SingleSettings {
    DirectionAngles sensing_angles{deg2rad(90.0), deg2rad(90.0)};
    double sensing_range = 50.0;
    UePlacement ue{{deg2rad(135.0), deg2rad(150.0)}, 30.0, 100.0};
    std::vector<double> sinr_db{5.0, 10.0, 20.0, 30.0};
    PhiSweep sweep;
    bool cross_check_sca = true;
};

struct CoverageSettings {
    PhiSweep sweep;
};

struct CassiniSettings {
    std::vector<double> levels_db;  // empty: five levels spread over the isotropic map
};

struct WavesimSettings {
    std::vector<int> n_samples{4096};
    int trials = 100;
    Position point{0.0, 50.0, 10.0};
    std::uint64_t noise_seed = 7;
};

struct OracleSettings {
    std::vector<DirectionAngles> point_angles{{deg2rad(90.0), deg2rad(90.0)}};
    std::vector<double> point_ranges{50.0};
    double sinr_db = 10.0;
    double step_fraction = 0.01;
};

/// Fully resolved run configuration.
struct ExperimentConfig {
    Scenario scenario;
    ScaConfig sca;
    SingleSettings single;
    CoverageSettings coverage;
    CassiniSettings cassini;
    WavesimSettings wavesim;
    OracleSettings oracle;

    nlohmann::json resolved;               // every parameter with its value
    std::vector<std::string> defaulted;    // dotted paths of parameters not given in the file
};

/// Reads a configuration object. Unknown keys and invalid values are collected and reported together
/// in one ValidationError. `full` switches the defaults to the 8x8 / 50x50 deployment.
ExperimentConfig parse_config(const nlohmann::json& doc, bool full, std::optional<std::uint64_t> seed_override);

ExperimentConfig load_config_file(const std::string& path, bool full, std::optional<std::uint64_t> seed_override);

/// Every parameter at its default, as a config document.
nlohmann::json default_config_document(bool full);

}  // namespace isac
