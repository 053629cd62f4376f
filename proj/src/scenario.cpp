#include "isac/scenario.hpp"

#include <cmath>
#include <sstream>

#include "isac/error.hpp"

namespace isac {

double Scenario::sensing_constant() const {
    return k_cpi() * beta0 * beta0 * std::norm(alpha) / sensing_noise_power;
}

std::vector<double> Scenario::sinr_thresholds() const {
    std::vector<double> out;
    out.reserve(ues.size());
    for (const auto& ue : ues)
        out.push_back(ue.sinr_threshold);
    return out;
}

void Scenario::validate() const {
    std::ostringstream problems;
    auto check = [&](bool ok, const char* what) {
        if (!ok)
            problems << "\n  - " << what;
    };
    check(bs_height >= 0.0 && std::isfinite(bs_height), "bs_height must be finite and non-negative");
    check(inter_bs_distance > 0.0 && std::isfinite(inter_bs_distance), "inter_bs_distance must be positive");
    check(tx_array.m_x >= 1 && tx_array.m_z >= 1 && tx_array.spacing_over_wavelength > 0.0,
          "tx_array needs m_x, m_z >= 1 and positive spacing");
    check(rx_array.m_x >= 1 && rx_array.m_z >= 1 && rx_array.spacing_over_wavelength > 0.0,
          "rx_array needs m_x, m_z >= 1 and positive spacing");
    check(transmit_power > 0.0, "transmit_power must be positive");
    check(ue_noise_power > 0.0, "ue_noise_power must be positive");
    check(sensing_noise_power > 0.0, "sensing_noise_power must be positive");
    check(bandwidth > 0.0 && cpi_duration > 0.0, "bandwidth and cpi_duration must be positive");
    check(k_cpi() >= 1.0, "time-bandwidth product B*T_p must be at least 1");
    check(beta0 > 0.0, "beta0 must be positive");
    check(rician_factor >= 0.0, "rician_factor must be non-negative");
    check(static_cast<int>(ues.size()) <= tx_array.elements(), "number of UEs must not exceed transmit antennas");
    for (const auto& ue : ues) {
        check(ue.sinr_threshold > 0.0, "every UE sinr threshold must be positive");
        check(ue.range >= 1.0, "every UE range must be at least 1 m");
    }
    check(grid_nx >= 1 && grid_ny >= 1, "grid counts must be at least 1");
    check(region.extent_x >= 0.0 && region.extent_y >= 0.0, "region extents must be non-negative");

    const std::string msg = problems.str();
    if (!msg.empty())
        throw ValidationError("invalid scenario:" + msg);
}

Scenario full_scenario() {
    Scenario s;
    s.tx_array = {8, 8, 0.5};
    s.rx_array = {8, 8, 0.5};
    s.ues = {
        {{deg2rad(135.0), deg2rad(30.0)}, 30.0, 100.0},
        {{deg2rad(135.0), deg2rad(150.0)}, 30.0, 100.0},
    };
    s.region = {0.0, 50.0, 50.0, 50.0, 10.0};
    s.grid_nx = 50;
    s.grid_ny = 50;
    return s;
}

Scenario desk_scenario() {
    Scenario s = full_scenario();
    s.tx_array = {4, 4, 0.5};
    s.rx_array = {4, 4, 0.5};
    s.grid_nx = 9;
    s.grid_ny = 9;
    return s;
}

}  // namespace isac
