#include "isac/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "isac/error.hpp"
#include "isac/parallel.hpp"

namespace isac {

BeamformerSet::BeamformerSet(cmat w, int k_comm, double power_budget) : w_(std::move(w)), k_comm_(k_comm) {
    if (w_.rows() != w_.cols())
        throw ValidationError("beamforming matrix must be square (M_t x M_t), got " + std::to_string(w_.rows()) + "x" +
                              std::to_string(w_.cols()));
    if (k_comm_ < 0 || k_comm_ > w_.cols())
        throw ValidationError("k_comm out of range");
    if (!w_.allFinite())
        throw ValidationError("beamforming matrix has non-finite entries");
    const double p = power();
    if (p > power_budget * (1.0 + 1e-9))
        throw ValidationError("beamformer power " + std::to_string(p) + " exceeds budget " + std::to_string(power_budget));
}

BeamformerSet isotropic_beamformer(int antennas, double power, int k_comm) {
    return BeamformerSet(cmat::Identity(antennas, antennas) * std::sqrt(power / antennas), k_comm, power);
}

double comm_sinr(const BeamformerSet& w, const cvec& h_k, int k, double sigma2) {
    if (!(sigma2 > 0.0))
        throw ValidationError("noise power must be positive");
    if (k < 0 || k >= w.k_comm())
        throw ValidationError("UE index " + std::to_string(k) + " is not a communication column");
    if (h_k.size() != w.antennas())
        throw ValidationError("channel length does not match the array");
    const cmat& W = w.matrix();
    double interference = 0.0;
    for (int i = 0; i < w.k_comm(); ++i) {
        if (i != k)
            interference += std::norm(h_k.dot(W.col(i)));
    }
    return std::norm(h_k.dot(W.col(k))) / (interference + sigma2);
}

std::vector<double> comm_sinrs(const BeamformerSet& w, const ChannelSet& channels, double sigma2) {
    std::vector<double> out;
    out.reserve(channels.h.size());
    for (int k = 0; k < channels.users(); ++k)
        out.push_back(comm_sinr(w, channels.h[k], k, sigma2));
    return out;
}

double sensing_snr(const BeamformerSet& w, const Position& q, const Scenario& scenario) {
    const double dt = distance(q, scenario.bs1());
    const double dr = distance(q, scenario.bs2());
    if (!(dt > 0.0) || !(dr > 0.0))
        throw DegenerateGeometryError("sensing point coincides with a base station");
    const cvec b = upa_steering(angles_from_positions(scenario.bs1(), q), scenario.tx_array);
    const cvec a = upa_steering(angles_from_positions(scenario.bs2(), q), scenario.rx_array);
    const double quad = (w.matrix().adjoint() * b).squaredNorm();
    return scenario.sensing_constant() * a.squaredNorm() * quad / (dt * dt * dr * dr);
}

double beampattern_gain(const BeamformerSet& w, const DirectionAngles& angles, const ArrayGeometry& geom) {
    const double total = w.power();
    if (!(total > 0.0))
        throw DegenerateGeometryError("beampattern of a zero-power beamformer is undefined");
    const cvec b = upa_steering(angles, geom);
    if (b.size() != w.antennas())
        throw ValidationError("array geometry does not match the beamformer size");
    return (b.adjoint() * w.matrix()).squaredNorm() / total;
}

const rvec& eta_weights(CoverageGrid& grid, const Scenario& scenario) {
    const int L = grid.size();
    grid.eta.resize(L);
    for (int l = 0; l < L; ++l) {
        const double dt = distance(grid.points[l], scenario.bs1());
        const double dr = distance(grid.points[l], scenario.bs2());
        if (!(dt > 0.0) || !(dr > 0.0))
            throw DegenerateGeometryError("grid point coincides with a base station");
        grid.eta(l) = dt * dt * dr * dr / grid.rx_steering.col(l).squaredNorm();
    }
    return grid.eta;
}

rvec steering_power(const BeamformerSet& w, const CoverageGrid& grid) {
    const int L = grid.size();
    rvec out(L);
    const cmat& W = w.matrix();
    parallel_for(L, [&](int l) { out(l) = (W.adjoint() * grid.tx_steering.col(l)).squaredNorm(); });
    return out;
}

SnrMap snr_map(const BeamformerSet& w, const CoverageGrid& grid, const Scenario& scenario) {
    const int L = grid.size();
    if (L == 0)
        throw ValidationError("empty coverage grid");
    if (grid.eta.size() != L || !(grid.eta.minCoeff() > 0.0))
        throw ValidationError("coverage grid weights not initialised; run eta_weights first");
    const double c = scenario.sensing_constant();
    SnrMap map;
    map.values = c * steering_power(w, grid).cwiseQuotient(grid.eta);
    map.worst_point_index = 0;
    for (int l = 1; l < L; ++l) {
        if (map.values(l) < map.values(map.worst_point_index))
            map.worst_point_index = l;
    }
    map.worst_case = map.values(map.worst_point_index);
    return map;
}

double isotropic_sensing_snr(const Position& q, const Scenario& scenario) {
    const double dt = distance(q, scenario.bs1());
    const double dr = distance(q, scenario.bs2());
    if (!(dt > 0.0) || !(dr > 0.0))
        throw DegenerateGeometryError("sensing point coincides with a base station");
    const int M = scenario.tx_antennas();
    const cvec b = upa_steering(angles_from_positions(scenario.bs1(), q), scenario.tx_array);
    const cvec a = upa_steering(angles_from_positions(scenario.bs2(), q), scenario.rx_array);
    const double quad = scenario.transmit_power / M * b.squaredNorm();
    return scenario.sensing_constant() * a.squaredNorm() * quad / (dt * dt * dr * dr);
}

std::vector<ContourLevel> cassini_contours(const Scenario& scenario, const std::vector<double>& levels_db,
                                           const CoverageGrid& grid) {
    const int L = grid.size();
    const double hx = 0.5 * grid.spacing_x;
    const double hy = 0.5 * grid.spacing_y;

    // Isotropic SNR range (in dB) over each point's half-cell neighbourhood.
    std::vector<double> lo(L), hi(L);
    parallel_for(L, [&](int l) {
        const Position& p = grid.points[l];
        double mn = std::numeric_limits<double>::infinity();
        double mx = -mn;
        for (int i = -1; i <= 1; ++i) {
            for (int j = -1; j <= 1; ++j) {
                if ((i != 0 && hx == 0.0) || (j != 0 && hy == 0.0))
                    continue;
                const double v = to_db(isotropic_sensing_snr({p.x + i * hx, p.y + j * hy, p.z}, scenario));
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
        }
        lo[l] = mn;
        hi[l] = mx;
    });

    std::vector<ContourLevel> out;
    out.reserve(levels_db.size());
    for (double level : levels_db) {
        ContourLevel c;
        c.level_db = level;
        const double slack = 1e-9 * std::max(1.0, std::abs(level));
        for (int l = 0; l < L; ++l) {
            if (level >= lo[l] - slack && level <= hi[l] + slack)
                c.indices.push_back(l);
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace isac
