#pragma once

#include <string>
#include <vector>

#include "isac/channels.hpp"
#include "isac/conic.hpp"
#include "isac/error.hpp"
#include "isac/metrics.hpp"

namespace isac {

struct ScaConfig {
    double epsilon = 1e-6;          // relative zeta increase below which iteration stops
    int max_outer_iterations = 50;
    bool extrapolate = true;        // linearize at an extrapolated point when that keeps zeta monotone
    conic::SolverSettings solver;
    const conic::ConicSolver* backend = nullptr;  // reference interior-point solver when null

    void validate() const;
};

/// First-order lower bound of g(W) = sum_k |b^H w_k|^2 around a local point W0:
/// g(W, W0) = 2 sum_k Re{conj(c_k) b^H w_k} - sum_k |c_k|^2 with c_k = b^H w0_k.
struct TaylorBound {
    cvec b;
    cvec c;
    double constant = 0.0;

    double evaluate(const cmat& w) const;
};

TaylorBound taylor_lower_bound(const BeamformerSet& w_local, const cvec& b);

/// Problem data for one SCA step. Decision variables are W / w_scale (embedded column by column)
/// followed by zeta / zeta_scale.
struct Subproblem {
    conic::ConicProgram program;
    conic::ComplexEmbedding embedding;
    double w_scale = 1.0;
    double zeta_scale = 1.0;
    std::vector<int> grid_rows;  // grid index represented by each coverage row (after deduplication)

    /// Beamformer from a solver point; comm columns rotated so h_k^H w_k >= 0.
    cmat decode_beamformer(const rvec& x, const ChannelSet& channels) const;
    double decode_zeta(const rvec& x) const;
};

Subproblem build_subproblem(const BeamformerSet& w_local, const ChannelSet& channels, const CoverageGrid& grid,
                            const Scenario& scenario);

/// Indices of the first occurrence of every distinct grid point.
std::vector<int> unique_grid_points(const CoverageGrid& grid);

/// min_l sum_k |b_l^H w_k|^2 / eta_l, the reduced-unit worst-case coverage value.
double coverage_objective(const cmat& w, const CoverageGrid& grid);

/// Benchmark columns plus the leftover power on one beam toward the grid centroid.
/// Throws InfeasibleError if the benchmark is infeasible or needs more than P_t.
BeamformerSet initialize(const ChannelSet& channels, const CoverageGrid& grid, const Scenario& scenario,
                         const conic::SolverSettings& settings = {});

enum class ScaTermination { converged, iteration_limit };

const char* to_string(ScaTermination t);

struct ScaIteration {
    int index = 0;
    double zeta = 0.0;             // subproblem optimum, reduced units
    double true_objective = 0.0;   // coverage_objective of the new iterate
    double worst_snr_db = 0.0;     // worst-case gamma_S of the new iterate
    int solver_iterations = 0;
    double solver_gap = 0.0;
    double wall_seconds = 0.0;
    bool extrapolated = false;     // local point was extrapolated from the last two iterates
};

struct ScaTrace {
    double initial_objective = 0.0;
    std::vector<ScaIteration> iterations;
    std::vector<BeamformerSet> iterates;      // one per iteration, in order
    std::vector<BeamformerSet> local_points;  // linearization point of each iteration
    BeamformerSet final;
    ScaTermination termination = ScaTermination::iteration_limit;

    double zeta_final() const { return iterations.empty() ? initial_objective : iterations.back().zeta; }
};

/// Solver stopped without an optimal certificate; carries the iterations completed so far.
class ScaAborted : public SolverError {
public:
    ScaAborted(const std::string& what, ScaTrace trace) : SolverError(what), trace_(std::move(trace)) {}
    const ScaTrace& trace() const { return trace_; }

private:
    ScaTrace trace_;
};

ScaTrace run_sca(const BeamformerSet& init, const ChannelSet& channels, const CoverageGrid& grid,
                 const Scenario& scenario, const ScaConfig& config = {});

}  // namespace isac
