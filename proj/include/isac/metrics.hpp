#pragma once

#include <limits>
#include <vector>

#include "isac/channels.hpp"
#include "isac/geometry.hpp"
#include "isac/scenario.hpp"

namespace isac {

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// Transmit matrix W = [w_1 ... w_Mt]; the first k_comm columns carry UE data, the rest dedicated radar waveforms.
class BeamformerSet {
public:
    BeamformerSet() = default;

    /// Throws ValidationError if tr(W W^H) exceeds power_budget by more than 1e-9 relative,
    /// if W is not square, or if k_comm is out of range.
    BeamformerSet(cmat w, int k_comm, double power_budget = std::numeric_limits<double>::infinity());

    const cmat& matrix() const { return w_; }
    int k_comm() const { return k_comm_; }
    int antennas() const { return static_cast<int>(w_.rows()); }
    double power() const { return w_.squaredNorm(); }
    cmat covariance() const { return w_ * w_.adjoint(); }

private:
    cmat w_;
    int k_comm_ = 0;
};

/// W = sqrt(P / M) * I.
BeamformerSet isotropic_beamformer(int antennas, double power, int k_comm = 0);

/// SINR of UE k (0-based); interference only from the other communication columns.
double comm_sinr(const BeamformerSet& w, const cvec& h_k, int k, double sigma2);
std::vector<double> comm_sinrs(const BeamformerSet& w, const ChannelSet& channels, double sigma2);

/// Sensing SNR at q after matched filtering and optimal receive combining (linear).
double sensing_snr(const BeamformerSet& w, const Position& q, const Scenario& scenario);

/// ||b^H W||^2 / tr(W W^H) toward `angles` for the transmit array.
double beampattern_gain(const BeamformerSet& w, const DirectionAngles& angles, const ArrayGeometry& geom);

/// eta_l = ||q_l - o||^2 ||q_l - o'||^2 / ||a(q_l)||^2, stored in grid.eta and returned.
const rvec& eta_weights(CoverageGrid& grid, const Scenario& scenario);

/// sum_k |b_l^H w_k|^2 = b_l^H W W^H b_l for every grid point.
rvec steering_power(const BeamformerSet& w, const CoverageGrid& grid);

struct SnrMap {
    rvec values;  // linear gamma_S per grid point
    double worst_case = 0.0;
    int worst_point_index = -1;
};

/// Requires eta_weights to have been run on the grid.
SnrMap snr_map(const BeamformerSet& w, const CoverageGrid& grid, const Scenario& scenario);

struct ContourLevel {
    double level_db = 0.0;
    std::vector<int> indices;  // grid points whose half-cell neighbourhood straddles the level
};

/// Iso-SNR contours of isotropic transmission (Cassini ovals). A point belongs to a level when
/// the isotropic SNR sampled over its half-cell neighbourhood brackets the level.
std::vector<ContourLevel> cassini_contours(const Scenario& scenario, const std::vector<double>& levels_db,
                                           const CoverageGrid& grid);

/// Isotropic sensing SNR at an arbitrary point (used by the contour extraction).
double isotropic_sensing_snr(const Position& q, const Scenario& scenario);

}  // namespace isac
