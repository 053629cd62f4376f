#include "isac/sca.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "isac/benchmark.hpp"
#include "isac/parallel.hpp"

namespace isac {

using conic::BlockBuilder;
using conic::ConeKind;

void ScaConfig::validate() const {
    if (!(epsilon > 0.0))
        throw ValidationError("SCA epsilon must be positive");
    if (max_outer_iterations < 1)
        throw ValidationError("SCA needs at least one outer iteration");
}

const char* to_string(ScaTermination t) {
    return t == ScaTermination::converged ? "converged" : "iteration_limit";
}

double TaylorBound::evaluate(const cmat& w) const {
    if (w.cols() != c.size() || w.rows() != b.size())
        throw ValidationError("beamformer shape does not match the bound");
    double v = constant;
    for (int k = 0; k < c.size(); ++k)
        v += 2.0 * (std::conj(c(k)) * b.dot(w.col(k))).real();
    return v;
}

TaylorBound taylor_lower_bound(const BeamformerSet& w_local, const cvec& b) {
    if (b.size() != w_local.antennas())
        throw ValidationError("steering vector length does not match the beamformer");
    TaylorBound t;
    t.b = b;
    t.c = w_local.matrix().adjoint() * b;
    t.c = t.c.conjugate().eval();  // c_k = b^H w_k
    t.constant = -t.c.squaredNorm();
    return t;
}

std::vector<int> unique_grid_points(const CoverageGrid& grid) {
    std::vector<int> keep;
    keep.reserve(grid.size());
    for (int l = 0; l < grid.size(); ++l) {
        bool dup = false;
        for (int j : keep) {
            if (grid.points[j] == grid.points[l]) {
                dup = true;
                break;
            }
        }
        if (!dup)
            keep.push_back(l);
    }
    return keep;
}

double coverage_objective(const cmat& w, const CoverageGrid& grid) {
    if (grid.size() == 0)
        throw ValidationError("empty coverage grid");
    if (grid.eta.size() != grid.size())
        throw ValidationError("coverage grid weights not initialised; run eta_weights first");
    double best = std::numeric_limits<double>::infinity();
    for (int l = 0; l < grid.size(); ++l)
        best = std::min(best, (w.adjoint() * grid.tx_steering.col(l)).squaredNorm() / grid.eta(l));
    return best;
}

Subproblem build_subproblem(const BeamformerSet& w_local, const ChannelSet& channels, const CoverageGrid& grid,
                            const Scenario& scenario) {
    const int M = w_local.antennas();
    const int K = channels.users();
    if (grid.size() == 0)
        throw ValidationError("empty coverage grid: no coverage rows");
    if (grid.eta.size() != grid.size() || !(grid.eta.minCoeff() > 0.0))
        throw ValidationError("coverage grid weights not initialised; run eta_weights first");
    if (grid.tx_steering.rows() != M)
        throw ValidationError("grid steering vectors do not match the transmit array");
    if (K != w_local.k_comm())
        throw ValidationError("beamformer comm partition does not match the number of UEs");
    if (K > 0 && channels.antennas() != M)
        throw ValidationError("channel length does not match the transmit array");
    const std::vector<double> gammas = scenario.sinr_thresholds();
    if (static_cast<int>(gammas.size()) != K)
        throw ValidationError("scenario must list one SINR threshold per UE");
    for (double g : gammas)
        if (!(g > 0.0))
            throw ValidationError("SINR thresholds must be positive");
    const double P = scenario.transmit_power;
    const double sigma2 = scenario.ue_noise_power;
    if (!(P > 0.0) || !(sigma2 > 0.0))
        throw ValidationError("transmit power and noise power must be positive");
    const double sigma = std::sqrt(sigma2);

    Subproblem sp;
    sp.w_scale = std::sqrt(P);
    sp.grid_rows = unique_grid_points(grid);
    sp.zeta_scale = 0.0;
    for (int l : sp.grid_rows)
        sp.zeta_scale = std::max(sp.zeta_scale, P * grid.tx_steering.col(l).squaredNorm() / grid.eta(l));

    conic::VariableLayout layout;
    for (int k = 0; k < M; ++k)
        layout.add("w" + std::to_string(k + 1), 2 * M);
    const int zeta = layout.add("zeta", 1);
    const int n = layout.size();
    sp.embedding = conic::ComplexEmbedding(std::vector<int>(M, M), 0);
    const auto& emb = sp.embedding;
    const double r = sp.w_scale / sigma;

    std::vector<conic::ConstraintBuilder> builders;
    for (int k = 0; k < K; ++k) {
        const std::string name = "sinr_" + std::to_string(k + 1);
        builders.push_back({name, [&, k, name](const conic::VariableLayout&) {
                                return sinr_block(name, channels, k, gammas[k], emb, K, n, r);
                            }});
    }
    builders.push_back({"power", [&](const conic::VariableLayout&) {
                            BlockBuilder b("power", ConeKind::second_order, n);
                            b.add_constant_row(1.0);
                            for (int j = 0; j < emb.dimension(); ++j)
                                b.add_entry_row(j, 1.0, 0.0);
                            return b.build();
                        }});
    builders.push_back({"coverage", [&](const conic::VariableLayout&) {
                            const int rows = static_cast<int>(sp.grid_rows.size());
                            std::vector<std::vector<std::pair<int, double>>> coef(rows);
                            std::vector<double> offset(rows);
                            parallel_for(rows, [&](int i) {
                                const int l = sp.grid_rows[i];
                                const TaylorBound tb = taylor_lower_bound(w_local, grid.tx_steering.col(l));
                                const double s = 1.0 / (grid.eta(l) * sp.zeta_scale);
                                auto& row = coef[i];
                                for (int k = 0; k < M; ++k) {
                                    if (tb.c(k) == 0.0)
                                        continue;
                                    for (int m = 0; m < M; ++m) {
                                        const std::complex<double> v = 2.0 * tb.c(k) * tb.b(m) * sp.w_scale * s;
                                        row.emplace_back(emb.real_index(k, m), v.real());
                                        row.emplace_back(emb.imag_index(k, m), v.imag());
                                    }
                                }
                                row.emplace_back(zeta, -1.0);
                                offset[i] = tb.constant * s;
                            });
                            BlockBuilder b("coverage", ConeKind::nonnegative, n);
                            for (int i = 0; i < rows; ++i)
                                b.add_row(coef[i], offset[i]);
                            return b.build();
                        }});
    builders.push_back({"imag", [&](const conic::VariableLayout&) {
                            BlockBuilder b("imag", ConeKind::zero, n);
                            for (int k = 0; k < K; ++k)
                                b.add_row(emb.functional(channels.h[k], k, n).second * r, 0.0);
                            return b.build();
                        }});

    rvec objective = rvec::Zero(n);
    objective(zeta) = 1.0;
    sp.program = conic::assemble(std::move(layout), builders, std::move(objective));
    return sp;
}

cmat Subproblem::decode_beamformer(const rvec& x, const ChannelSet& channels) const {
    const auto cols = embedding.reconstruct(x);
    const int M = static_cast<int>(cols.size());
    cmat W(M, M);
    for (int k = 0; k < M; ++k) {
        cvec w = cols[k] * w_scale;
        if (k < channels.users()) {
            const std::complex<double> g = channels.h[k].dot(w);
            if (std::abs(g) > 0.0)
                w *= std::conj(g) / std::abs(g);
        }
        W.col(k) = w;
    }
    // Solver round-off may overshoot the budget by ~tolerance; pull back onto the ball.
    const double budget = w_scale * w_scale;
    const double p = W.squaredNorm();
    if (p > budget)
        W *= std::sqrt(budget / p);
    return W;
}

double Subproblem::decode_zeta(const rvec& x) const {
    return x(program.layout.offset("zeta")) * zeta_scale;
}

BeamformerSet initialize(const ChannelSet& channels, const CoverageGrid& grid, const Scenario& scenario,
                         const conic::SolverSettings& settings) {
    const int M = scenario.tx_antennas();
    const int K = channels.users();
    const double P = scenario.transmit_power;
    if (grid.size() == 0)
        throw ValidationError("empty coverage grid");
    cmat W = cmat::Zero(M, M);
    double used = 0.0;
    if (K > 0) {
        const BeamformerSet bench =
            comm_only_beamforming(channels, scenario.sinr_thresholds(), scenario.ue_noise_power, settings);
        used = bench.power();
        if (used > P * (1.0 + 1e-9))
            throw InfeasibleError("SINR targets need " + std::to_string(used) + " W, budget is " + std::to_string(P) +
                                  " W");
        W = bench.matrix();
    }
    // Leftover power goes toward the grid centroid, shared between the first radar column and the comm
    // columns. A comm column's share avoids the other UEs' channels and adds coherently at the centroid.
    const double residual = std::max(0.0, P - used);
    if (residual > 0.0) {
        const cvec b = upa_steering(angles_from_positions(scenario.bs1(), grid.centroid()), scenario.tx_array);
        const int shares = K + (K < M ? 1 : 0);
        const double each = residual / shares;
        for (int k = 0; k < K; ++k) {
            cvec v = b;
            if (K > 1) {
                cmat others(M, K - 1);
                for (int j = 0, c = 0; j < K; ++j)
                    if (j != k)
                        others.col(c++) = channels.h[j];
                const Eigen::HouseholderQR<cmat> qr(others);
                const cmat q = qr.householderQ() * cmat::Identity(M, K - 1);
                v -= q * (q.adjoint() * v);
            }
            if (v.norm() <= 1e-9 * b.norm())
                continue;
            const std::complex<double> own = b.dot(W.col(k));
            const std::complex<double> add = b.dot(v);
            std::complex<double> phase = 1.0;
            if (std::abs(own) > 0.0 && std::abs(add) > 0.0)
                phase = (own / std::abs(own)) / (add / std::abs(add));
            W.col(k) += std::sqrt(each) * phase * v / v.norm();
        }
        if (K < M)
            W.col(K) = std::sqrt(each) * b / b.norm();
    }
    const double p = W.squaredNorm();
    if (p > P)
        W *= std::sqrt(P / p);
    return BeamformerSet(std::move(W), K, P);
}

ScaTrace run_sca(const BeamformerSet& init, const ChannelSet& channels, const CoverageGrid& grid,
                 const Scenario& scenario, const ScaConfig& config) {
    config.validate();
    const conic::InteriorPointSolver reference;
    const conic::ConicSolver& backend =
        config.backend ? *config.backend : static_cast<const conic::ConicSolver&>(reference);

    ScaTrace trace;
    trace.initial_objective = coverage_objective(init.matrix(), grid);
    trace.final = init;
    const double c_s = scenario.sensing_constant();

    BeamformerSet current = init;
    BeamformerSet previous;
    bool have_previous = false;
    int momentum_age = 0;
    double prev = trace.initial_objective;
    for (int it = 1; it <= config.max_outer_iterations; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const double current_value = coverage_objective(current.matrix(), grid);

        // Optional extrapolated local point; kept only when it cannot break monotonicity.
        auto attempt = [&](const BeamformerSet& local, conic::SolveReport& rep, Subproblem& sp) {
            sp = build_subproblem(local, channels, grid, scenario);
            rep = backend.solve(sp.program, config.solver);
            return rep.status == conic::SolveStatus::optimal;
        };
        Subproblem sp;
        conic::SolveReport rep;
        BeamformerSet local = current;
        bool done = false;
        if (config.extrapolate && have_previous) {
            ++momentum_age;
            const double beta = (momentum_age - 1.0) / (momentum_age + 2.0);
            const BeamformerSet extrapolated(current.matrix() + beta * (current.matrix() - previous.matrix()),
                                             current.k_comm());
            if (attempt(extrapolated, rep, sp) && sp.decode_zeta(rep.x) >= current_value) {
                local = extrapolated;
                done = true;
            } else {
                momentum_age = 0;
            }
        }
        if (!done && !attempt(current, rep, sp)) {
            throw ScaAborted("SCA iteration " + std::to_string(it) + ": subproblem status " +
                                 conic::to_string(rep.status) + (rep.message.empty() ? "" : " (" + rep.message + ")"),
                             trace);
        }
        BeamformerSet next(sp.decode_beamformer(rep.x, channels), current.k_comm(), scenario.transmit_power);
        const auto t1 = std::chrono::steady_clock::now();

        ScaIteration rec;
        rec.index = it;
        rec.zeta = sp.decode_zeta(rep.x);
        rec.true_objective = coverage_objective(next.matrix(), grid);
        rec.worst_snr_db = to_db(c_s * rec.true_objective);
        rec.solver_iterations = rep.iterations;
        rec.solver_gap = rep.gap;
        rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.extrapolated = done;
        trace.iterations.push_back(rec);
        trace.iterates.push_back(next);
        trace.local_points.push_back(local);
        trace.final = next;
        previous = current;
        have_previous = true;
        current = next;

        const double increase = (rec.zeta - prev) / std::max(std::abs(prev), std::numeric_limits<double>::min());
        prev = rec.zeta;
        if (increase < config.epsilon) {
            trace.termination = ScaTermination::converged;
            break;
        }
    }
    return trace;
}

}  // namespace isac
