#pragma once

#include <vector>

#include "isac/geometry.hpp"

namespace isac {

/// Lattice over Hermitian PSD matrices: diagonal entries and the real/imaginary parts of the
/// off-diagonal entries are integer multiples of `step`, trace <= power.
struct CovarianceGridSpec {
    int dimension = 2;
    double power = 1.0;
    double step = 0.0;  // 0 selects power/100 for dimension <= 2, power/8 for dimension 3

    double resolved_step() const;
    void validate() const;
};

/// maximize min_l b_l^H R b_l / eta_l  s.t.  h^H R h >= sigma2 * gamma_bar, tr(R) <= P, R PSD.
struct OracleProblem {
    cvec h;
    std::vector<cvec> b;
    rvec eta;
    double gamma_bar = 0.0;
    double sigma2 = 1.0;

    void validate(int dimension) const;
};

struct OracleResult {
    bool feasible = false;
    cmat best;         // R (comm plus radar covariance)
    cmat best_radar;   // radar share R' (zero unless searched)
    double objective = 0.0;
    long long evaluated = 0;
    double step = 0.0;
    double cell_tolerance = 0.0;  // objective change allowed by one lattice step in every parameter
};

/// Exhaustive search over the lattice. Ties go to the lowest enumeration index.
OracleResult covariance_grid_search(const CovarianceGridSpec& spec, const OracleProblem& problem);

/// Same problem with separate comm covariance R1 and radar covariance R' (SINR counts only R1).
/// With radar_free = false R' is pinned to zero.
OracleResult split_covariance_search(const CovarianceGridSpec& spec, const OracleProblem& problem, bool radar_free);

/// Every lattice matrix of the spec, in enumeration order.
std::vector<cmat> enumerate_covariances(const CovarianceGridSpec& spec);

}  // namespace isac
