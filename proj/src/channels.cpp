#include "isac/channels.hpp"

#include <cmath>
#include <string>

#include "isac/error.hpp"
#include "isac/rng.hpp"

namespace isac {

SensingLinkGains sensing_link_gains(const Position& q, const Scenario& scenario) {
    const double dt = distance(q, scenario.bs1());
    const double dr = distance(q, scenario.bs2());
    if (!(dt > 0.0) || !(dr > 0.0))
        throw DegenerateGeometryError("sensing point coincides with a base station");
    return {scenario.beta0 / (dt * dt), scenario.beta0 / (dr * dr)};
}

ChannelSet generate_rician_channels(const std::vector<UePlacement>& ues, const Scenario& scenario,
                                    std::uint64_t seed) {
    const int M = scenario.tx_antennas();
    if (ues.empty())
        throw ValidationError("at least one UE is required to generate channels");
    if (static_cast<int>(ues.size()) > M)
        throw ValidationError("over-loaded system: " + std::to_string(ues.size()) + " UEs for " + std::to_string(M) +
                              " transmit antennas");
    const double G = scenario.rician_factor;
    if (!(G >= 0.0))
        throw ValidationError("rician factor must be non-negative");

    const double los = std::sqrt(G / (G + 1.0));
    const double nlos = std::sqrt(1.0 / (G + 1.0));

    ChannelSet out;
    out.rician_factor = G;
    out.seed = seed;
    out.h.reserve(ues.size());
    for (std::size_t k = 0; k < ues.size(); ++k) {
        const auto& ue = ues[k];
        if (!(ue.range >= 1.0))
            throw ValidationError("UE range must be at least 1 m");
        const double amplitude = std::sqrt(scenario.beta0) / ue.range;
        const cvec b = upa_steering(ue.angles, scenario.tx_array);

        Rng rng(seed, k);
        cvec h(M);
        for (int i = 0; i < M; ++i)
            h(i) = amplitude * (los * b(i) + nlos * rng.complex_normal());
        out.h.push_back(std::move(h));
    }
    return out;
}

ChannelSet generate_rician_channels(const Scenario& scenario) {
    return generate_rician_channels(scenario.ues, scenario, scenario.seed);
}

}  // namespace isac
