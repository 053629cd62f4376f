#include "isac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "isac/error.hpp"
#include "isac/parallel.hpp"

namespace isac {

double CovarianceGridSpec::resolved_step() const {
    if (step > 0.0)
        return step;
    return dimension <= 2 ? power / 100.0 : power / 8.0;
}

void CovarianceGridSpec::validate() const {
    if (dimension < 1 || dimension > 3)
        throw ValidationError("covariance grid search supports dimensions 1 to 3, got " + std::to_string(dimension));
    if (!(power > 0.0) || !std::isfinite(power))
        throw ValidationError("covariance grid power must be positive");
    if (step < 0.0 || !std::isfinite(step))
        throw ValidationError("covariance grid step must be positive");
    if (power / resolved_step() > 1000.0)
        throw ValidationError("covariance grid step too small for exhaustive search");
}

void OracleProblem::validate(int dimension) const {
    if (h.size() != dimension)
        throw ValidationError("channel length does not match the covariance dimension");
    if (b.empty() || b.size() > 3)
        throw ValidationError("oracle supports 1 to 3 sensing points");
    if (eta.size() != static_cast<int>(b.size()))
        throw ValidationError("one weight per sensing point is required");
    for (std::size_t l = 0; l < b.size(); ++l) {
        if (b[l].size() != dimension)
            throw ValidationError("steering length does not match the covariance dimension");
        if (!(eta(static_cast<int>(l)) > 0.0))
            throw ValidationError("weights must be positive");
    }
    if (!(gamma_bar >= 0.0) || !(sigma2 > 0.0))
        throw ValidationError("need gamma_bar >= 0 and sigma2 > 0");
}

namespace {

// Parameter vector p = [d_0..d_{M-1}, re_01, im_01, re_02, im_02, re_12, im_12] (in lattice units).
struct Lattice {
    int M;
    int total;  // trace budget in steps
    std::vector<std::pair<int, int>> pairs;

    explicit Lattice(int m, int t) : M(m), total(t) {
        for (int i = 0; i < M; ++i)
            for (int j = i + 1; j < M; ++j)
                pairs.emplace_back(i, j);
    }
    int params() const { return M + 2 * static_cast<int>(pairs.size()); }
};

// Coefficients of v^H R v in the parameter vector.
rvec quad_coefficients(const Lattice& lat, const cvec& v) {
    rvec c(lat.params());
    for (int i = 0; i < lat.M; ++i)
        c(i) = std::norm(v(i));
    for (std::size_t p = 0; p < lat.pairs.size(); ++p) {
        const auto [i, j] = lat.pairs[p];
        const std::complex<double> x = std::conj(v(i)) * v(j);
        c(lat.M + 2 * p) = 2.0 * x.real();
        c(lat.M + 2 * p + 1) = -2.0 * x.imag();
    }
    return c;
}

bool psd_by_minors(const Lattice& lat, const std::vector<int>& p) {
    // Pairwise minors are enforced by the enumeration bounds; only the full determinant is left.
    if (lat.M < 3)
        return true;
    const double d0 = p[0], d1 = p[1], d2 = p[2];
    const std::complex<double> r01(p[3], p[4]), r02(p[5], p[6]), r12(p[7], p[8]);
    const double det = d0 * d1 * d2 + 2.0 * (r01 * r12 * std::conj(r02)).real() - d0 * std::norm(r12) -
                       d1 * std::norm(r02) - d2 * std::norm(r01);
    return det >= -1e-9;
}

cmat to_matrix(const Lattice& lat, const std::vector<int>& p, double step) {
    cmat R = cmat::Zero(lat.M, lat.M);
    for (int i = 0; i < lat.M; ++i)
        R(i, i) = p[i] * step;
    for (std::size_t q = 0; q < lat.pairs.size(); ++q) {
        const auto [i, j] = lat.pairs[q];
        R(i, j) = std::complex<double>(p[lat.M + 2 * q], p[lat.M + 2 * q + 1]) * step;
        R(j, i) = std::conj(R(i, j));
    }
    return R;
}

// Visits every lattice point whose first diagonal entry equals d0, in enumeration order.
template <class Fn>
void visit_slice(const Lattice& lat, int d0, Fn&& fn) {
    std::vector<int> p(lat.params(), 0);
    p[0] = d0;
    // Remaining diagonals: odometer with sum <= total.
    std::vector<int> diag(lat.M, 0);
    diag[0] = d0;
    auto visit_offdiag = [&]() {
        const int np = static_cast<int>(lat.pairs.size());
        std::vector<int> bound(np);
        for (int q = 0; q < np; ++q) {
            const auto [i, j] = lat.pairs[q];
            bound[q] = static_cast<int>(std::floor(std::sqrt(static_cast<double>(diag[i]) * diag[j]) + 1e-9));
        }
        for (int i = 0; i < lat.M; ++i)
            p[i] = diag[i];
        // Odometer over re/im pairs constrained to re^2 + im^2 <= d_i d_j.
        std::vector<int> re(np), im(np);
        for (int q = 0; q < np; ++q) {
            re[q] = -bound[q];
            im[q] = -bound[q];
        }
        auto fits = [&](int q) {
            const auto [i, j] = lat.pairs[q];
            return static_cast<long long>(re[q]) * re[q] + static_cast<long long>(im[q]) * im[q] <=
                   static_cast<long long>(diag[i]) * diag[j];
        };
        while (true) {
            bool ok = true;
            for (int q = 0; q < np && ok; ++q)
                ok = fits(q);
            if (ok) {
                for (int q = 0; q < np; ++q) {
                    p[lat.M + 2 * q] = re[q];
                    p[lat.M + 2 * q + 1] = im[q];
                }
                if (psd_by_minors(lat, p))
                    fn(p);
            }
            int q = np - 1;
            for (; q >= 0; --q) {
                if (im[q] < bound[q]) {
                    ++im[q];
                    break;
                }
                im[q] = -bound[q];
                if (re[q] < bound[q]) {
                    ++re[q];
                    break;
                }
                re[q] = -bound[q];
            }
            if (q < 0)
                break;
        }
    };
    if (lat.M == 1) {
        visit_offdiag();
        return;
    }
    std::function<void(int, int)> rec = [&](int idx, int left) {
        if (idx == lat.M) {
            visit_offdiag();
            return;
        }
        for (int v = 0; v <= left; ++v) {
            diag[idx] = v;
            rec(idx + 1, left - v);
        }
    };
    rec(1, lat.total - d0);
}

struct SliceBest {
    bool feasible = false;
    double value = -std::numeric_limits<double>::infinity();
    std::vector<int> params;
    long long count = 0;
};

double cell_tolerance(const OracleProblem& pr, double step) {
    double tol = 0.0;
    for (std::size_t l = 0; l < pr.b.size(); ++l) {
        const double s = pr.b[l].cwiseAbs().sum();
        tol = std::max(tol, step * s * s / pr.eta(static_cast<int>(l)));
    }
    return tol;
}

}  // namespace

std::vector<cmat> enumerate_covariances(const CovarianceGridSpec& spec) {
    spec.validate();
    const double step = spec.resolved_step();
    const Lattice lat(spec.dimension, static_cast<int>(std::floor(spec.power / step + 1e-9)));
    std::vector<cmat> out;
    for (int d0 = 0; d0 <= lat.total; ++d0)
        visit_slice(lat, d0, [&](const std::vector<int>& p) { out.push_back(to_matrix(lat, p, step)); });
    return out;
}

OracleResult covariance_grid_search(const CovarianceGridSpec& spec, const OracleProblem& pr) {
    spec.validate();
    pr.validate(spec.dimension);
    const double step = spec.resolved_step();
    const Lattice lat(spec.dimension, static_cast<int>(std::floor(spec.power / step + 1e-9)));

    const rvec ch = quad_coefficients(lat, pr.h) * step;
    const double need = pr.sigma2 * pr.gamma_bar;
    std::vector<rvec> cb;
    for (std::size_t l = 0; l < pr.b.size(); ++l)
        cb.push_back(quad_coefficients(lat, pr.b[l]) * (step / pr.eta(static_cast<int>(l))));
    const double slack = 1e-12 * std::max(need, 1e-300);

    std::vector<SliceBest> slices(lat.total + 1);
    parallel_for(lat.total + 1, [&](int d0) {
        SliceBest& sb = slices[d0];
        rvec x(lat.params());
        visit_slice(lat, d0, [&](const std::vector<int>& p) {
            ++sb.count;
            for (int i = 0; i < lat.params(); ++i)
                x(i) = p[i];
            if (ch.dot(x) < need - slack)
                return;
            double v = std::numeric_limits<double>::infinity();
            for (const auto& c : cb)
                v = std::min(v, c.dot(x));
            if (!sb.feasible || v > sb.value) {
                sb.feasible = true;
                sb.value = v;
                sb.params = p;
            }
        });
    });

    OracleResult res;
    res.step = step;
    res.cell_tolerance = cell_tolerance(pr, step);
    res.best = cmat::Zero(lat.M, lat.M);
    res.best_radar = cmat::Zero(lat.M, lat.M);
    for (const auto& sb : slices) {
        res.evaluated += sb.count;
        if (sb.feasible && (!res.feasible || sb.value > res.objective)) {
            res.feasible = true;
            res.objective = sb.value;
            res.best = to_matrix(lat, sb.params, step);
        }
    }
    return res;
}

OracleResult split_covariance_search(const CovarianceGridSpec& spec, const OracleProblem& pr, bool radar_free) {
    spec.validate();
    pr.validate(spec.dimension);
    const double step = spec.resolved_step();
    const Lattice lat(spec.dimension, static_cast<int>(std::floor(spec.power / step + 1e-9)));

    struct Point {
        std::vector<int> p;
        int trace;
    };
    std::vector<Point> pts;
    for (int d0 = 0; d0 <= lat.total; ++d0)
        visit_slice(lat, d0, [&](const std::vector<int>& p) {
            int tr = 0;
            for (int i = 0; i < lat.M; ++i)
                tr += p[i];
            pts.push_back({p, tr});
        });

    const int np = static_cast<int>(pts.size());
    const rvec ch = quad_coefficients(lat, pr.h) * step;
    std::vector<rvec> cb;
    for (std::size_t l = 0; l < pr.b.size(); ++l)
        cb.push_back(quad_coefficients(lat, pr.b[l]) * (step / pr.eta(static_cast<int>(l))));
    const double need = pr.sigma2 * pr.gamma_bar;
    const double slack = 1e-12 * std::max(need, 1e-300);

    // Per-point values: SINR numerator and per-l objective terms.
    rvec sinr(np);
    Eigen::MatrixXd terms(cb.size(), np);
    for (int i = 0; i < np; ++i) {
        rvec x(lat.params());
        for (int j = 0; j < lat.params(); ++j)
            x(j) = pts[i].p[j];
        sinr(i) = ch.dot(x);
        for (std::size_t l = 0; l < cb.size(); ++l)
            terms(static_cast<int>(l), i) = cb[l].dot(x);
    }
    int zero_index = 0;
    for (int i = 0; i < np; ++i) {
        if (std::all_of(pts[i].p.begin(), pts[i].p.end(), [](int v) { return v == 0; })) {
            zero_index = i;
            break;
        }
    }

    struct Best {
        bool feasible = false;
        double value = 0.0;
        int r1 = -1, rp = -1;
        long long count = 0;
    };
    std::vector<Best> slots(np);
    parallel_for(np, [&](int i) {
        Best& b = slots[i];
        if (sinr(i) < need - slack)
            return;
        auto consider = [&](int j) {
            ++b.count;
            if (pts[i].trace + pts[j].trace > lat.total)
                return;
            const double v = (terms.col(i) + terms.col(j)).minCoeff();
            if (!b.feasible || v > b.value) {
                b = {true, v, i, j, b.count};
            }
        };
        if (radar_free) {
            for (int j = 0; j < np; ++j)
                consider(j);
        } else {
            consider(zero_index);
        }
    });

    OracleResult res;
    res.step = step;
    res.cell_tolerance = cell_tolerance(pr, step);
    res.best = cmat::Zero(lat.M, lat.M);
    res.best_radar = cmat::Zero(lat.M, lat.M);
    for (const auto& b : slots) {
        res.evaluated += b.count;
        if (b.feasible && (!res.feasible || b.value > res.objective)) {
            res.feasible = true;
            res.objective = b.value;
            res.best_radar = to_matrix(lat, pts[b.rp].p, step);
            res.best = to_matrix(lat, pts[b.r1].p, step) + res.best_radar;
        }
    }
    return res;
}

}  // namespace isac
