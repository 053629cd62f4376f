#pragma once

#include "isac/geometry.hpp"

namespace isac {

enum class Regime { sensing_limited, comm_limited };

const char* to_string(Regime regime);

struct SinglePointSolution {
    cvec w1;
    Regime regime = Regime::sensing_limited;
    double boundary_threshold = 0.0;  // |h^H b_bar|^2 P / sigma2, linear
    double objective = 0.0;           // |b0^H w1|^2
};

/// Optimal beamformer for one UE and one sensing direction b0:
/// maximize |b0^H w|^2 s.t. |h1^H w|^2 >= sigma2 * gamma_bar, ||w||^2 <= power.
/// Throws InfeasibleError when gamma_bar exceeds ||h1||^2 power / sigma2.
SinglePointSolution optimal_single(const cvec& h1, const cvec& b0, double power, double sigma2, double gamma_bar);

/// Upper end of the feasible threshold range, ||h1||^2 power / sigma2.
double max_feasible_sinr(const cvec& h1, double power, double sigma2);

struct CollapsedCovariance {
    cmat r_star;
    cmat r_prime;  // always zero
};

/// Folds the dedicated-radar covariance into the communication covariance.
/// Throws ValidationError unless both inputs are Hermitian PSD (eigenvalues >= -1e-10).
CollapsedCovariance lemma1_collapse(const cmat& r1_hat, const cmat& rp_hat);

bool is_hermitian_psd(const cmat& r, double tol = 1e-10);

}  // namespace isac
