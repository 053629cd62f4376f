#pragma once

#include <cstdint>
#include <vector>

#include "isac/metrics.hpp"

namespace isac {

/// Sample-domain transmit streams over one CPI of N samples: column i of `streams` is s_i[n].
/// Columns 0..K-1 are unit-modulus QPSK symbols; the rest are radar streams whose Gram matrix is N * I
/// and, when N >= M_t, which are also orthogonal to every comm stream.
struct WaveformEnsemble {
    int n_samples = 0;
    int k_comm = 0;
    cmat streams;  // N x M_t
    std::uint64_t seed = 0;

    int antennas() const { return static_cast<int>(streams.cols()); }
};

/// Throws ValidationError when N < M_t - K or the counts are inconsistent.
WaveformEnsemble generate_waveforms(int k_comm, int antennas, int n_samples, std::uint64_t seed);

/// Noise-free matched-filter outputs, one column per stream: Y[:, k] = sum_n r[n] conj(s_k[n]) / sqrt(N),
/// with r[n] = alpha sqrt(beta_t beta_r) a(q) b(q)^H W s[n] at the aligned delay.
cmat matched_filter_signal(const BeamformerSet& w, const Position& q, const WaveformEnsemble& ens,
                           const Scenario& scenario);

/// Matched-filter outputs for receiver noise alone (per-sample variance sigma2), one matrix per trial.
/// Trial t draws from stream (seed, t).
std::vector<cmat> matched_filter_noise(const WaveformEnsemble& ens, int rx_antennas, double sigma2,
                                       std::uint64_t seed, int trials);

/// Unit-norm receive combiner matched to the stacked signal vec(Y) = conj(W^H b) kron a.
cvec optimal_combiner(const BeamformerSet& w, const Position& q, const Scenario& scenario);

struct MatchedFilterResult {
    double analytic_snr = 0.0;     // closed form with K_CPI = N
    double empirical_snr = 0.0;    // combined signal power / pooled per-output noise power
    double projected_snr = 0.0;    // combined signal power / mean |v^H n|^2 over trials
    double signal_power = 0.0;     // |v^H vec(Y_signal)|^2
    double noise_power = 0.0;      // pooled per-output noise power
    int trials = 0;
    bool zero_signal = false;      // W sends nothing toward q
    bool saturated = false;        // noise disabled, SNR unbounded
};

/// Monte Carlo check of the sensing SNR. noise_scale multiplies the noise amplitude (0 disables noise).
MatchedFilterResult matched_filter_snr(const BeamformerSet& w, const Position& q, const WaveformEnsemble& ens,
                                       const Scenario& scenario, std::uint64_t noise_seed, int trials,
                                       double noise_scale = 1.0);

/// Same with an explicit unit-norm combiner v of length M_r * M_t.
MatchedFilterResult matched_filter_snr(const BeamformerSet& w, const Position& q, const WaveformEnsemble& ens,
                                       const Scenario& scenario, std::uint64_t noise_seed, int trials,
                                       const cvec& combiner, double noise_scale = 1.0);

/// gamma_S with the coherent gain replaced by N.
double analytic_snr(const BeamformerSet& w, const Position& q, const Scenario& scenario, int n_samples);

}  // namespace isac
