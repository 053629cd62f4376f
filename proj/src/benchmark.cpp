#include "isac/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isac/error.hpp"

namespace isac {

using conic::BlockBuilder;
using conic::ConeKind;

namespace {

void check_inputs(const ChannelSet& channels, const std::vector<double>& gamma_bars, double sigma2) {
    const int K = channels.users();
    if (K < 1)
        throw ValidationError("benchmark needs at least one UE");
    if (static_cast<int>(gamma_bars.size()) != K)
        throw ValidationError("one SINR threshold per UE is required");
    if (K > channels.antennas())
        throw ValidationError("more UEs than transmit antennas");
    if (!(sigma2 > 0.0))
        throw ValidationError("noise power must be positive");
    for (double g : gamma_bars)
        if (!(g >= 0.0) || !std::isfinite(g))
            throw ValidationError("SINR thresholds must be finite and non-negative");
    for (const auto& h : channels.h)
        if (!(h.norm() > 0.0))
            throw DegenerateGeometryError("zero channel vector");
}

}  // namespace

conic::ConeBlock sinr_block(const std::string& name, const ChannelSet& channels, int k, double gamma,
                            const conic::ComplexEmbedding& emb, int comm_columns, int width, double r) {
    if (!(gamma > 0.0))
        throw ValidationError("SINR threshold must be positive");
    BlockBuilder b(name, ConeKind::second_order, width);
    b.add_row(emb.functional(channels.h[k], k, width).first * (r / std::sqrt(gamma)), 0.0);
    for (int i = 0; i < comm_columns; ++i) {
        if (i == k)
            continue;
        const auto [re, im] = emb.functional(channels.h[k], i, width);
        b.add_row(re * r, 0.0);
        b.add_row(im * r, 0.0);
    }
    b.add_constant_row(1.0);
    return b.build();
}

PowerMinProgram build_power_min_program(const ChannelSet& channels, const std::vector<double>& gamma_bars,
                                        double sigma2) {
    check_inputs(channels, gamma_bars, sigma2);
    const int K = channels.users();
    const int M = channels.antennas();
    const double sigma = std::sqrt(sigma2);

    // Work in units where each single-user power minimum is O(1).
    double hmin = channels.h.front().norm();
    double gmax = 0.0;
    for (int k = 0; k < K; ++k) {
        hmin = std::min(hmin, channels.h[k].norm());
        gmax = std::max(gmax, gamma_bars[k]);
    }
    PowerMinProgram out;
    out.scale = sigma * std::sqrt(std::max(gmax, 1e-6)) / hmin;

    conic::VariableLayout layout;
    for (int k = 0; k < K; ++k)
        layout.add("w" + std::to_string(k + 1), 2 * M);
    const int t = layout.add("t", 1);
    const int n = layout.size();
    out.embedding = conic::ComplexEmbedding(std::vector<int>(K, M), 0);
    const auto& emb = out.embedding;
    const double r = out.scale / sigma;

    std::vector<conic::ConstraintBuilder> builders;
    for (int k = 0; k < K; ++k) {
        if (gamma_bars[k] == 0.0)
            continue;
        const std::string name = "sinr_" + std::to_string(k + 1);
        builders.push_back({name, [&, k, name](const conic::VariableLayout&) {
                                return sinr_block(name, channels, k, gamma_bars[k], emb, K, n, r);
                            }});
    }
    builders.push_back({"power", [&](const conic::VariableLayout&) {
                            BlockBuilder b("power", ConeKind::second_order, n);
                            b.add_entry_row(t, 1.0, 0.0);
                            for (int j = 0; j < emb.dimension(); ++j)
                                b.add_entry_row(j, 1.0, 0.0);
                            return b.build();
                        }});
    builders.push_back({"imag", [&](const conic::VariableLayout&) {
                            BlockBuilder b("imag", ConeKind::zero, n);
                            for (int k = 0; k < K; ++k)
                                b.add_row(emb.functional(channels.h[k], k, n).second * r, 0.0);
                            return b.build();
                        }});

    rvec objective = rvec::Zero(n);
    objective(t) = -1.0;
    out.program = conic::assemble(std::move(layout), builders, std::move(objective));
    return out;
}

BeamformerSet comm_only_beamforming(const ChannelSet& channels, const std::vector<double>& gamma_bars, double sigma2,
                                    const conic::SolverSettings& settings, const conic::ConicSolver* solver) {
    const PowerMinProgram pm = build_power_min_program(channels, gamma_bars, sigma2);
    const conic::InteriorPointSolver reference;
    const conic::ConicSolver& backend = solver ? *solver : static_cast<const conic::ConicSolver&>(reference);
    const conic::SolveReport rep = backend.solve(pm.program, settings);
    if (rep.status == conic::SolveStatus::infeasible)
        throw InfeasibleError("communication SINR targets are infeasible (solver certificate after " +
                              std::to_string(rep.iterations) + " iterations)");
    if (rep.status != conic::SolveStatus::optimal)
        throw SolverError(std::string("power minimization ended with status ") + conic::to_string(rep.status) +
                          ": " + rep.message);

    const int K = channels.users();
    const int M = channels.antennas();
    const auto cols = pm.embedding.reconstruct(rep.x);
    cmat W = cmat::Zero(M, M);
    for (int k = 0; k < K; ++k) {
        cvec w = cols[k] * pm.scale;
        // Rotate so h_k^H w_k is real and non-negative.
        const std::complex<double> g = channels.h[k].dot(w);
        if (std::abs(g) > 0.0)
            w *= std::conj(g) / std::abs(g);
        W.col(k) = w;
    }
    return BeamformerSet(std::move(W), K);
}

}  // namespace isac
