#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "isac/geometry.hpp"

namespace isac {

struct UePlacement {
    DirectionAngles angles;      // as seen from BS-1
    double range = 30.0;         // meters from BS-1
    double sinr_threshold = 100; // linear
};

/// Physical constants, geometry and budgets of a bi-static deployment.
/// BS-1 (transmitter) sits at (0, 0, H) and BS-2 (sensing receiver) at (0, D, H).
struct Scenario {
    double bs_height = 10.0;
    double inter_bs_distance = 100.0;
    ArrayGeometry tx_array{4, 4, 0.5};
    ArrayGeometry rx_array{4, 4, 0.5};

    double transmit_power = 0.1;        // W
    double ue_noise_power = 1e-12;      // W
    double sensing_noise_power = 1e-12; // W, N0 * B
    double bandwidth = 1e8;             // Hz
    double cpi_duration = 1e-3;         // s
    double beta0 = 1e-4;
    std::complex<double> alpha{1.0, 0.0};
    double rician_factor = 10.0;

    std::vector<UePlacement> ues;
    RegionSpec region;
    int grid_nx = 9;
    int grid_ny = 9;
    std::uint64_t seed = 1;

    Position bs1() const { return {0.0, 0.0, bs_height}; }
    Position bs2() const { return {0.0, inter_bs_distance, bs_height}; }
    int tx_antennas() const { return tx_array.elements(); }
    int rx_antennas() const { return rx_array.elements(); }
    int users() const { return static_cast<int>(ues.size()); }
    double k_cpi() const { return bandwidth * cpi_duration; }
    double noise_psd() const { return sensing_noise_power / bandwidth; }

    /// K_CPI * beta0^2 * |alpha|^2 / sigma^2, the factor that turns b^H W W^H b / eta into gamma_S.
    double sensing_constant() const;

    std::vector<double> sinr_thresholds() const;

    /// Throws ValidationError listing every violated invariant.
    void validate() const;
};

/// Full-scale deployment: 8x8 arrays on both BSs, 50 m x 50 m region with a 50 x 50 grid,
/// two UEs at (135, 30) and (135, 150) degrees with a 20 dB SINR target.
Scenario full_scenario();

/// Desk-scale variant of full_scenario(): 4x4 arrays and a 9 x 9 grid.
Scenario desk_scenario();

}  // namespace isac
