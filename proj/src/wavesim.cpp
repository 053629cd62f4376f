#include "isac/wavesim.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "isac/channels.hpp"
#include "isac/error.hpp"
#include "isac/parallel.hpp"
#include "isac/rng.hpp"

namespace isac {

namespace {

constexpr std::uint64_t kRadarStreamBase = 1u << 20;

struct Link {
    std::complex<double> gain;  // alpha * sqrt(beta_t beta_r)
    cvec a;
    cvec b;
};

Link sensing_link(const Position& q, const Scenario& scenario) {
    const SensingLinkGains g = sensing_link_gains(q, scenario);
    Link l;
    l.gain = scenario.alpha * std::sqrt(g.beta_t * g.beta_r);
    l.b = upa_steering(angles_from_positions(scenario.bs1(), q), scenario.tx_array);
    l.a = upa_steering(angles_from_positions(scenario.bs2(), q), scenario.rx_array);
    return l;
}

}  // namespace

WaveformEnsemble generate_waveforms(int k_comm, int antennas, int n_samples, std::uint64_t seed) {
    if (antennas < 1 || k_comm < 0 || k_comm > antennas)
        throw ValidationError("need 0 <= K <= M_t and M_t >= 1");
    if (n_samples < 1)
        throw ValidationError("need at least one sample");
    const int radar = antennas - k_comm;
    if (n_samples < radar)
        throw ValidationError("insufficient length: " + std::to_string(n_samples) + " samples cannot hold " +
                              std::to_string(radar) + " orthogonal radar streams");

    WaveformEnsemble ens;
    ens.n_samples = n_samples;
    ens.k_comm = k_comm;
    ens.seed = seed;
    ens.streams.resize(n_samples, antennas);

    const double a = std::sqrt(0.5);
    for (int k = 0; k < k_comm; ++k) {
        Rng rng(seed, static_cast<std::uint64_t>(k));
        for (int n = 0; n < n_samples; ++n) {
            const std::uint64_t u = rng.next_u64();
            ens.streams(n, k) = {(u & 1u) ? a : -a, (u & 2u) ? a : -a};
        }
    }
    if (radar == 0)
        return ens;

    cmat raw(n_samples, radar);
    for (int i = 0; i < radar; ++i) {
        Rng rng(seed, kRadarStreamBase + static_cast<std::uint64_t>(i));
        for (int n = 0; n < n_samples; ++n)
            raw(n, i) = rng.complex_normal();
    }
    // Orthonormalize; with enough samples also remove every comm-stream component.
    const bool against_comm = n_samples >= antennas;
    cmat basis(n_samples, against_comm ? antennas : radar);
    if (against_comm) {
        basis.leftCols(k_comm) = ens.streams.leftCols(k_comm);
        basis.rightCols(radar) = raw;
    } else {
        basis = raw;
    }
    Eigen::HouseholderQR<cmat> qr(basis);
    const cmat q = qr.householderQ() * cmat::Identity(n_samples, basis.cols());
    ens.streams.rightCols(radar) = q.rightCols(radar) * std::sqrt(static_cast<double>(n_samples));
    return ens;
}

cmat matched_filter_signal(const BeamformerSet& w, const Position& q, const WaveformEnsemble& ens,
                           const Scenario& scenario) {
    if (w.antennas() != ens.antennas())
        throw ValidationError("waveform ensemble does not match the transmit array");
    const Link l = sensing_link(q, scenario);
    // Far-field sample at the target: x[n] = b^H W s[n]; row vector over n.
    const Eigen::RowVectorXcd x = (l.b.adjoint() * w.matrix()) * ens.streams.transpose();
    const Eigen::RowVectorXcd mf = x * ens.streams.conjugate() / std::sqrt(static_cast<double>(ens.n_samples));
    return l.gain * l.a * mf;
}

std::vector<cmat> matched_filter_noise(const WaveformEnsemble& ens, int rx_antennas, double sigma2,
                                       std::uint64_t seed, int trials) {
    if (trials < 1)
        throw ValidationError("need at least one trial");
    if (!(sigma2 >= 0.0))
        throw ValidationError("noise power must be non-negative");
    std::vector<cmat> out(trials);
    const double amp = std::sqrt(sigma2);
    const double norm = 1.0 / std::sqrt(static_cast<double>(ens.n_samples));
    const cmat sconj = ens.streams.conjugate();
    parallel_for(trials, [&](int t) {
        Rng rng(seed, static_cast<std::uint64_t>(t));
        cmat noise(rx_antennas, ens.n_samples);
        for (int n = 0; n < ens.n_samples; ++n)
            for (int m = 0; m < rx_antennas; ++m)
                noise(m, n) = amp * rng.complex_normal();
        out[t] = noise * sconj * norm;
    });
    return out;
}

cvec optimal_combiner(const BeamformerSet& w, const Position& q, const Scenario& scenario) {
    const Link l = sensing_link(q, scenario);
    const cvec g = (w.matrix().adjoint() * l.b).conjugate();
    const int Mr = static_cast<int>(l.a.size());
    cvec v(Mr * g.size());
    for (int k = 0; k < g.size(); ++k)
        v.segment(k * Mr, Mr) = g(k) * l.a;
    const double nv = v.norm();
    if (!(nv > 0.0))
        return cvec::Zero(v.size());
    return v / nv;
}

double analytic_snr(const BeamformerSet& w, const Position& q, const Scenario& scenario, int n_samples) {
    const SensingLinkGains g = sensing_link_gains(q, scenario);
    const cvec b = upa_steering(angles_from_positions(scenario.bs1(), q), scenario.tx_array);
    const cvec a = upa_steering(angles_from_positions(scenario.bs2(), q), scenario.rx_array);
    return n_samples * g.beta_t * g.beta_r * std::norm(scenario.alpha) * a.squaredNorm() *
           (w.matrix().adjoint() * b).squaredNorm() / scenario.sensing_noise_power;
}

MatchedFilterResult matched_filter_snr(const BeamformerSet& w, const Position& q, const WaveformEnsemble& ens,
                                       const Scenario& scenario, std::uint64_t noise_seed, int trials,
                                       double noise_scale) {
    return matched_filter_snr(w, q, ens, scenario, noise_seed, trials, optimal_combiner(w, q, scenario),
                              noise_scale);
}

MatchedFilterResult matched_filter_snr(const BeamformerSet& w, const Position& q, const WaveformEnsemble& ens,
                                       const Scenario& scenario, std::uint64_t noise_seed, int trials,
                                       const cvec& combiner, double noise_scale) {
    if (!(noise_scale >= 0.0))
        throw ValidationError("noise scale must be non-negative");
    const int Mr = scenario.rx_antennas();
    if (combiner.size() != static_cast<Eigen::Index>(Mr) * w.antennas())
        throw ValidationError("combiner length must be M_r * M_t");

    MatchedFilterResult res;
    res.trials = trials;
    res.analytic_snr = analytic_snr(w, q, scenario, ens.n_samples);

    const cmat ys = matched_filter_signal(w, q, ens, scenario);
    const Eigen::Map<const cvec> ys_vec(ys.data(), ys.size());
    res.signal_power = std::norm(combiner.dot(ys_vec));
    if (!(combiner.norm() > 0.0) || res.signal_power == 0.0) {
        res.zero_signal = true;
        return res;
    }
    if (noise_scale == 0.0) {
        res.saturated = true;
        res.empirical_snr = res.projected_snr = std::numeric_limits<double>::infinity();
        return res;
    }
    const double sigma2 = scenario.sensing_noise_power * noise_scale * noise_scale;
    const std::vector<cmat> noise = matched_filter_noise(ens, Mr, sigma2, noise_seed, trials);
    const double vnorm2 = combiner.squaredNorm();
    double pooled = 0.0, projected = 0.0;
    for (const auto& yn : noise) {
        pooled += yn.squaredNorm() / static_cast<double>(yn.size());
        const Eigen::Map<const cvec> yv(yn.data(), yn.size());
        projected += std::norm(combiner.dot(yv)) / vnorm2;
    }
    pooled /= trials;
    projected /= trials;
    res.noise_power = pooled;
    res.empirical_snr = res.signal_power / (pooled * vnorm2);
    res.projected_snr = res.signal_power / (projected * vnorm2);
    return res;
}

}  // namespace isac
