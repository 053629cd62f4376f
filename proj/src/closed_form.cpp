#include "isac/closed_form.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "isac/error.hpp"

namespace isac {

const char* to_string(Regime regime) {
    return regime == Regime::sensing_limited ? "sensing-limited" : "comm-limited";
}

double max_feasible_sinr(const cvec& h1, double power, double sigma2) {
    return h1.squaredNorm() * power / sigma2;
}

SinglePointSolution optimal_single(const cvec& h1, const cvec& b0, double power, double sigma2, double gamma_bar) {
    if (h1.size() == 0 || h1.size() != b0.size())
        throw ValidationError("channel and steering vectors must be non-empty and of equal length");
    if (!(power > 0.0) || !(sigma2 > 0.0))
        throw ValidationError("power and noise must be positive");
    if (!(gamma_bar >= 0.0) || !std::isfinite(gamma_bar))
        throw ValidationError("SINR threshold must be finite and non-negative");
    const double hn = h1.norm();
    const double bn = b0.norm();
    if (!(hn > 0.0) || !(bn > 0.0))
        throw DegenerateGeometryError("channel and steering vectors must be nonzero");

    const double limit = max_feasible_sinr(h1, power, sigma2);
    if (gamma_bar > limit * (1.0 + 1e-12))
        throw InfeasibleError("SINR threshold " + std::to_string(gamma_bar) + " exceeds the achievable maximum " +
                              std::to_string(limit));

    const cvec h_bar = h1 / hn;
    const cvec b_bar = b0 / bn;

    SinglePointSolution out;
    out.boundary_threshold = std::norm(h1.dot(b_bar)) * power / sigma2;

    const std::complex<double> beta = h_bar.dot(b0);  // h_bar^H b0
    const cvec b_perp = b0 - beta * h_bar;
    const bool near_parallel = b_perp.norm() < 1e-10 * bn;

    if (gamma_bar <= out.boundary_threshold || near_parallel) {
        out.regime = Regime::sensing_limited;
        out.w1 = std::sqrt(power) * b_bar;
    } else {
        out.regime = Regime::comm_limited;
        const double p_comm = std::min(power, sigma2 * gamma_bar / (hn * hn));
        const double phase = std::abs(beta) > 0.0 ? std::arg(beta) : 0.0;
        out.w1 = std::sqrt(p_comm) * std::polar(1.0, phase) * h_bar +
                 std::sqrt(power - p_comm) * b_perp / b_perp.norm();
    }
    out.objective = std::norm(b0.dot(out.w1));
    return out;
}

bool is_hermitian_psd(const cmat& r, double tol) {
    if (r.rows() != r.cols() || !r.allFinite())
        return false;
    if ((r - r.adjoint()).norm() > 1e-12 * std::max(1.0, r.norm()))
        return false;
    if (r.size() == 0)
        return true;
    Eigen::SelfAdjointEigenSolver<cmat> es(r, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

CollapsedCovariance lemma1_collapse(const cmat& r1_hat, const cmat& rp_hat) {
    if (r1_hat.rows() != rp_hat.rows() || r1_hat.cols() != rp_hat.cols())
        throw ValidationError("covariance matrices must have equal dimensions");
    if (!is_hermitian_psd(r1_hat))
        throw ValidationError("invalid covariance: communication covariance is not Hermitian PSD");
    if (!is_hermitian_psd(rp_hat))
        throw ValidationError("invalid covariance: radar covariance is not Hermitian PSD");
    return {r1_hat + rp_hat, cmat::Zero(rp_hat.rows(), rp_hat.cols())};
}

}  // namespace isac
