#pragma once

#include <vector>

#include "isac/channels.hpp"
#include "isac/conic.hpp"
#include "isac/metrics.hpp"

namespace isac {

/// Communication-only power minimization: minimize sum_k ||w_k||^2 s.t. SINR_k >= gamma_k.
/// Columns K+1..M_t of the result are zero. A zero threshold drops that UE's constraint.
/// Throws InfeasibleError when the SINR set cannot be met, SolverError on a numerical failure.
BeamformerSet comm_only_beamforming(const ChannelSet& channels, const std::vector<double>& gamma_bars, double sigma2,
                                    const conic::SolverSettings& settings = {},
                                    const conic::ConicSolver* solver = nullptr);

/// SOC block for SINR_k >= gamma: Re(h_k^H w_k) / sqrt(gamma) >= ||(h_k^H w_i for i != k, sigma)|| with the
/// variables holding w / (sigma / r). Together with Im(h_k^H w_k) = 0 this is the SINR constraint.
conic::ConeBlock sinr_block(const std::string& name, const ChannelSet& channels, int k, double gamma,
                            const conic::ComplexEmbedding& emb, int comm_columns, int width, double r);

/// The cone program solved by comm_only_beamforming, in units where w = scale * x.
struct PowerMinProgram {
    conic::ConicProgram program;
    conic::ComplexEmbedding embedding;
    double scale = 1.0;
};

PowerMinProgram build_power_min_program(const ChannelSet& channels, const std::vector<double>& gamma_bars,
                                        double sigma2);

}  // namespace isac
