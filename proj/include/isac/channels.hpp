#pragma once

#include <cstdint>
#include <vector>

#include "isac/geometry.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// Per-UE downlink channels from BS-1; h_k enters the UE signal as h_k^H W s.
struct ChannelSet {
    std::vector<cvec> h;
    double rician_factor = 0.0;
    std::uint64_t seed = 0;

    int users() const { return static_cast<int>(h.size()); }
    int antennas() const { return h.empty() ? 0 : static_cast<int>(h.front().size()); }
};

struct SensingLinkGains {
    double beta_t = 0.0;  // BS-1 -> target
    double beta_r = 0.0;  // target -> BS-2
};

/// Free-space two-hop gains beta0 / range^2 for each hop.
SensingLinkGains sensing_link_gains(const Position& q, const Scenario& scenario);

/// h_k = sqrt(beta0 / d_k^2) * (sqrt(G/(G+1)) b(q_k) + sqrt(1/(G+1)) g_k), g_k ~ CN(0, I).
/// UE k draws from its own stream (seed, k), so adding a UE leaves earlier channels untouched.
ChannelSet generate_rician_channels(const std::vector<UePlacement>& ues, const Scenario& scenario, std::uint64_t seed);

/// Convenience overload using scenario.ues and scenario.seed.
ChannelSet generate_rician_channels(const Scenario& scenario);

}  // namespace isac
