// Homogeneous self-dual interior-point method for
//   minimize c'x  s.t.  A x = b,  G x + s = h,  s in K
// where K is a product of nonnegative orthants and second-order cones.
// ConicProgram blocks are mapped onto this form, presolved, equilibrated and solved densely.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include <Eigen/LU>

#include "isac/conic.hpp"
#include "isac/error.hpp"

namespace isac::conic {
namespace {

using Mat = Eigen::MatrixXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cones {
    int m_lp = 0;
    std::vector<int> soc_dim;
    std::vector<int> soc_start;
    int m = 0;

    int degree() const { return m_lp + static_cast<int>(soc_dim.size()); }
};

// Where an internal row came from.
struct RowOrigin {
    int block;
    int row;
};

struct Standard {
    int n = 0;
    Mat A, G;
    rvec c, b, h;
    Cones cones;
    std::vector<RowOrigin> eq_origin;
    std::vector<RowOrigin> cone_origin;
};

// ---------------------------------------------------------------- cone algebra

double soc_residual(const Eigen::Ref<const rvec>& v) {
    const double r = v.size() > 1 ? v.tail(v.size() - 1).norm() : 0.0;
    return (v(0) - r) * (v(0) + r);
}

void bring_to_cone(const Cones& k, const rvec& r, rvec& s) {
    double alpha = -0.99;
    for (int i = 0; i < k.m_lp; ++i)
        if (r(i) <= 0 && -r(i) > alpha)
            alpha = -r(i);
    for (std::size_t c = 0; c < k.soc_dim.size(); ++c) {
        const int st = k.soc_start[c], d = k.soc_dim[c];
        const double res = r(st) - (d > 1 ? r.segment(st + 1, d - 1).norm() : 0.0);
        if (res <= 0 && -res > alpha)
            alpha = -res;
    }
    s = r;
    alpha += 1.0;
    for (int i = 0; i < k.m_lp; ++i)
        s(i) += alpha;
    for (int st : k.soc_start)
        s(st) += alpha;
}

// Nesterov-Todd scaling point.
struct Scaling {
    rvec lp_w;  // sqrt(s/z)
    struct Soc {
        double eta = 1.0;
        double a = 1.0;
        rvec q;
    };
    std::vector<Soc> soc;

    static Scaling identity(const Cones& k) {
        Scaling w;
        w.lp_w = rvec::Ones(k.m_lp);
        for (int d : k.soc_dim)
            w.soc.push_back({1.0, 1.0, rvec::Zero(d - 1)});
        return w;
    }
};

bool update_scaling(const Cones& k, const rvec& s, const rvec& z, Scaling& w) {
    w.lp_w.resize(k.m_lp);
    for (int i = 0; i < k.m_lp; ++i) {
        if (!(s(i) > 0) || !(z(i) > 0))
            return false;
        w.lp_w(i) = std::sqrt(s(i) / z(i));
    }
    w.soc.resize(k.soc_dim.size());
    for (std::size_t c = 0; c < k.soc_dim.size(); ++c) {
        const int st = k.soc_start[c], d = k.soc_dim[c];
        const auto sc = s.segment(st, d);
        const auto zc = z.segment(st, d);
        const double sres = soc_residual(sc);
        const double zres = soc_residual(zc);
        if (!(sres > 0) || !(zres > 0) || sc(0) <= 0 || zc(0) <= 0)
            return false;
        const rvec sb = sc / std::sqrt(sres);
        const rvec zb = zc / std::sqrt(zres);
        const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
        auto& o = w.soc[c];
        o.a = (sb(0) + zb(0)) / (2.0 * gamma);
        o.q = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * gamma);
        o.eta = std::pow(sres / zres, 0.25);
    }
    return true;
}

rvec apply_w(const Cones& k, const Scaling& w, const rvec& v) {
    rvec out(v.size());
    out.head(k.m_lp) = w.lp_w.cwiseProduct(v.head(k.m_lp));
    for (std::size_t c = 0; c < k.soc_dim.size(); ++c) {
        const int st = k.soc_start[c], d = k.soc_dim[c];
        const auto& o = w.soc[c];
        const double v0 = v(st);
        const auto v1 = v.segment(st + 1, d - 1);
        const double qv = o.q.dot(v1);
        out(st) = o.eta * (o.a * v0 + qv);
        out.segment(st + 1, d - 1) = o.eta * (v1 + (v0 + qv / (1.0 + o.a)) * o.q);
    }
    return out;
}

rvec apply_w_inv(const Cones& k, const Scaling& w, const rvec& v) {
    rvec out(v.size());
    out.head(k.m_lp) = v.head(k.m_lp).cwiseQuotient(w.lp_w);
    for (std::size_t c = 0; c < k.soc_dim.size(); ++c) {
        const int st = k.soc_start[c], d = k.soc_dim[c];
        const auto& o = w.soc[c];
        const double v0 = v(st);
        const auto v1 = v.segment(st + 1, d - 1);
        const double qv = o.q.dot(v1);
        out(st) = (o.a * v0 - qv) / o.eta;
        out.segment(st + 1, d - 1) = (v1 + (-v0 + qv / (1.0 + o.a)) * o.q) / o.eta;
    }
    return out;
}

// W^2 for one second-order cone: eta^2 (2 wb wb' - J) with wb = (a, q).
Mat soc_w2(const Scaling::Soc& o) {
    const int d = static_cast<int>(o.q.size()) + 1;
    rvec wb(d);
    wb(0) = o.a;
    wb.tail(d - 1) = o.q;
    Mat m = 2.0 * wb * wb.transpose();
    m(0, 0) -= 1.0;
    for (int i = 1; i < d; ++i)
        m(i, i) += 1.0;
    return o.eta * o.eta * m;
}

// u o v
rvec jordan(const Cones& k, const rvec& u, const rvec& v) {
    rvec out(u.size());
    out.head(k.m_lp) = u.head(k.m_lp).cwiseProduct(v.head(k.m_lp));
    for (std::size_t c = 0; c < k.soc_dim.size(); ++c) {
        const int st = k.soc_start[c], d = k.soc_dim[c];
        out(st) = u.segment(st, d).dot(v.segment(st, d));
        out.segment(st + 1, d - 1) = u(st) * v.segment(st + 1, d - 1) + v(st) * u.segment(st + 1, d - 1);
    }
    return out;
}

// Solves lambda o u = v.
rvec cone_divide(const Cones& k, const rvec& lambda, const rvec& v) {
    rvec u(v.size());
    u.head(k.m_lp) = v.head(k.m_lp).cwiseQuotient(lambda.head(k.m_lp));
    for (std::size_t c = 0; c < k.soc_dim.size(); ++c) {
        const int st = k.soc_start[c], d = k.soc_dim[c];
        const double l0 = lambda(st);
        const auto l1 = lambda.segment(st + 1, d - 1);
        const double rho = soc_residual(lambda.segment(st, d));
        const double u0 = (l0 * v(st) - l1.dot(v.segment(st + 1, d - 1))) / rho;
        u(st) = u0;
        u.segment(st + 1, d - 1) = (v.segment(st + 1, d - 1) - u0 * l1) / l0;
    }
    return u;
}

void add_identity(const Cones& k, rvec& v, double t) {
    v.head(k.m_lp).array() += t;
    for (int st : k.soc_start)
        v(st) += t;
}

// Largest alpha with x + alpha d in the cone (x interior).
double max_step_soc(const Eigen::Ref<const rvec>& x, const Eigen::Ref<const rvec>& d) {
    const double c0 = soc_residual(x);
    if (!(c0 > 0))
        return 0.0;
    const double scale = std::sqrt(c0);
    const double x0 = x(0) / scale, d0 = d(0) / scale;
    const int n = static_cast<int>(x.size()) - 1;
    double a = d0 * d0, b = x0 * d0, c = 1.0;
    if (n > 0) {
        const rvec x1 = x.tail(n) / scale, d1 = d.tail(n) / scale;
        a -= d1.squaredNorm();
        b -= x1.dot(d1);
    }
    // q(alpha) = a alpha^2 + 2 b alpha + c, first positive root.
    double best = kInf;
    if (a == 0.0) {
        if (b < 0)
            best = -c / (2.0 * b);
    } else {
        const double disc = b * b - a * c;
        if (disc >= 0) {
            const double sq = std::sqrt(disc);
            const double qq = -(b + (b >= 0 ? sq : -sq));
            if (qq != 0.0) {
                const double r1 = qq / a, r2 = c / qq;
                if (r1 > 0)
                    best = std::min(best, r1);
                if (r2 > 0)
                    best = std::min(best, r2);
            }
        }
    }
    if (d0 < 0)
        best = std::min(best, -x0 / d0);
    return best;
}

double max_step(const Cones& k, const rvec& x, const rvec& d) {
    double alpha = kInf;
    for (int i = 0; i < k.m_lp; ++i)
        if (d(i) < 0)
            alpha = std::min(alpha, -x(i) / d(i));
    for (std::size_t c = 0; c < k.soc_dim.size(); ++c) {
        const int st = k.soc_start[c], dim = k.soc_dim[c];
        alpha = std::min(alpha, max_step_soc(x.segment(st, dim), d.segment(st, dim)));
    }
    return alpha;
}

// ---------------------------------------------------------------- KKT system

// [0 A' G'; A 0 0; G 0 -W^2] solved in the scaled form [0 A' Gt'; A 0 0; Gt 0 -I] with Gt = W^-1 G and
// dzt = W dz. The LP rows of Gt are eliminated into the (1,1) block.
class Kkt {
public:
    Kkt(const Standard& p) : p_(p) {}

    bool factor(const Scaling& w) {
        const Cones& k = p_.cones;
        const int n = p_.n, pe = static_cast<int>(p_.A.rows()), m = k.m, ms = m - k.m_lp;
        w_ = w;
        gt_.resize(m, n);
        for (int j = 0; j < n; ++j)
            gt_.col(j) = apply_w_inv(k, w_, p_.G.col(j));
        const int dim = n + pe + ms;
        Mat K = Mat::Zero(dim, dim);
        const auto glp = gt_.topRows(k.m_lp);
        K.topLeftCorner(n, n).noalias() = glp.transpose() * glp;
        K.topLeftCorner(n, n).diagonal().array() += kReg;
        K.block(0, n, n, pe) = p_.A.transpose();
        K.block(n, 0, pe, n) = p_.A;
        K.block(n, n, pe, pe).diagonal().array() = -kReg;
        K.block(0, n + pe, n, ms) = gt_.bottomRows(ms).transpose();
        K.block(n + pe, 0, ms, n) = gt_.bottomRows(ms);
        K.bottomRightCorner(ms, ms).diagonal().array() = -1.0;
        if (!K.allFinite())
            return false;
        lu_.compute(K);
        return true;
    }

    // Returns false when the solution is not finite.
    bool solve(const rvec& rx, const rvec& ry, const rvec& rz, rvec& dx, rvec& dy, rvec& dz) const {
        const Cones& k = p_.cones;
        const int n = p_.n, pe = static_cast<int>(p_.A.rows());
        dx = rvec::Zero(n);
        dy = rvec::Zero(pe);
        dz = rvec::Zero(k.m);
        rvec ex = rx, ey = ry, ez = rz;
        const double target = 1e-15 * (1.0 + std::max({norm_inf(rx), norm_inf(ry), norm_inf(rz)}));
        double prev = kInf;
        for (int it = 0; it < 8; ++it) {
            rvec cx, cy, cz;
            reduced_solve(ex, ey, ez, cx, cy, cz);
            if (!cx.allFinite() || !cy.allFinite() || !cz.allFinite())
                return false;
            dx += cx;
            dy += cy;
            dz += cz;
            residual(rx, ry, rz, dx, dy, dz, ex, ey, ez);
            const double e = std::max({norm_inf(ex), norm_inf(ey), norm_inf(ez)});
            if (e <= target || e > 0.5 * prev)
                break;
            prev = e;
        }
        return dx.allFinite() && dy.allFinite() && dz.allFinite();
    }

private:
    static constexpr double kReg = 1e-11;

    static double norm_inf(const rvec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

    void reduced_solve(const rvec& rx, const rvec& ry, const rvec& rz, rvec& dx, rvec& dy, rvec& dz) const {
        const Cones& k = p_.cones;
        const int n = p_.n, pe = static_cast<int>(p_.A.rows()), m = k.m, ms = m - k.m_lp;
        const rvec rzt = apply_w_inv(k, w_, rz);
        const auto glp = gt_.topRows(k.m_lp);
        rvec rhs(n + pe + ms);
        rhs.head(n) = rx + glp.transpose() * rzt.head(k.m_lp);
        rhs.segment(n, pe) = ry;
        rhs.tail(ms) = rzt.tail(ms);
        const rvec sol = lu_.solve(rhs);
        dx = sol.head(n);
        dy = sol.segment(n, pe);
        rvec dzt(m);
        dzt.head(k.m_lp) = glp * dx - rzt.head(k.m_lp);
        dzt.tail(ms) = sol.tail(ms);
        dz = apply_w_inv(k, w_, dzt);
    }

    void residual(const rvec& rx, const rvec& ry, const rvec& rz, const rvec& dx, const rvec& dy, const rvec& dz,
                  rvec& ex, rvec& ey, rvec& ez) const {
        const Cones& k = p_.cones;
        ex = rx - p_.A.transpose() * dy - p_.G.transpose() * dz;
        ey = ry - p_.A * dx;
        ez = rz - p_.G * dx + apply_w(k, w_, apply_w(k, w_, dz));
    }

    const Standard& p_;
    Scaling w_;
    Mat gt_;
    Eigen::PartialPivLU<Mat> lu_;
};

// ---------------------------------------------------------------- presolve

struct Presolved {
    Standard problem;
    std::vector<int> kept_columns;           // internal column -> program column
    std::vector<int> free_columns;           // columns in no row with nonzero cost
    bool trivially_infeasible = false;
    std::string message;
};

Presolved presolve(const ConicProgram& prog) {
    const int n = prog.dimension();
    Presolved out;

    // Count row memberships per column and record which ones are lone entries of zero-offset SOC tails.
    std::vector<int> uses(n, 0), lone_tail_uses(n, 0);
    for (const auto& b : prog.blocks) {
        for (int r = 0; r < b.rows(); ++r) {
            const int nnz = static_cast<int>(b.map.outerIndexPtr()[r + 1] - b.map.outerIndexPtr()[r]);
            for (SparseMatrix::InnerIterator it(b.map, r); it; ++it) {
                if (it.value() == 0.0)
                    continue;
                ++uses[it.col()];
                if (b.kind == ConeKind::second_order && r > 0 && nnz == 1 && b.offset(r) == 0.0)
                    ++lone_tail_uses[it.col()];
            }
        }
    }
    std::vector<char> keep(n, 1);
    for (int j = 0; j < n; ++j) {
        if (prog.objective(j) != 0.0) {
            if (uses[j] == 0) {
                out.free_columns.push_back(j);
                keep[j] = 0;
            }
            continue;
        }
        if (uses[j] == lone_tail_uses[j])
            keep[j] = 0;
    }
    std::vector<int> col_map(n, -1);
    for (int j = 0; j < n; ++j)
        if (keep[j]) {
            col_map[j] = static_cast<int>(out.kept_columns.size());
            out.kept_columns.push_back(j);
        }
    const int nk = static_cast<int>(out.kept_columns.size());

    struct Row {
        std::vector<std::pair<int, double>> coef;
        double offset;
        RowOrigin origin;
    };
    auto extract = [&](const ConeBlock& b, int bi, int r) {
        Row row{{}, b.offset(r), {bi, r}};
        for (SparseMatrix::InnerIterator it(b.map, r); it; ++it)
            if (it.value() != 0.0 && col_map[it.col()] >= 0)
                row.coef.emplace_back(col_map[it.col()], it.value());
        return row;
    };

    std::vector<Row> eq_rows, lp_rows;
    std::vector<std::vector<Row>> socs;
    for (int bi = 0; bi < static_cast<int>(prog.blocks.size()); ++bi) {
        const auto& b = prog.blocks[bi];
        if (b.kind == ConeKind::second_order) {
            std::vector<Row> cone;
            for (int r = 0; r < b.rows(); ++r) {
                Row row = extract(b, bi, r);
                if (r > 0 && row.coef.empty() && row.offset == 0.0)
                    continue;
                cone.push_back(std::move(row));
            }
            if (cone.size() == 1) {
                lp_rows.push_back(std::move(cone.front()));
            } else {
                socs.push_back(std::move(cone));
            }
            continue;
        }
        for (int r = 0; r < b.rows(); ++r) {
            Row row = extract(b, bi, r);
            if (row.coef.empty()) {
                const bool ok = b.kind == ConeKind::zero ? row.offset == 0.0 : row.offset >= 0.0;
                if (!ok) {
                    out.trivially_infeasible = true;
                    out.message = "constant row " + std::to_string(r) + " of block '" + b.name + "' is violated";
                }
                continue;
            }
            (b.kind == ConeKind::zero ? eq_rows : lp_rows).push_back(std::move(row));
        }
    }

    Standard& s = out.problem;
    s.n = nk;
    s.c.resize(nk);
    for (int j = 0; j < nk; ++j)
        s.c(j) = -prog.objective(out.kept_columns[j]);
    s.A = Mat::Zero(static_cast<int>(eq_rows.size()), nk);
    s.b.resize(static_cast<int>(eq_rows.size()));
    for (std::size_t i = 0; i < eq_rows.size(); ++i) {
        for (const auto& [j, v] : eq_rows[i].coef)
            s.A(static_cast<int>(i), j) += v;
        s.b(static_cast<int>(i)) = -eq_rows[i].offset;
        s.eq_origin.push_back(eq_rows[i].origin);
    }
    int m = static_cast<int>(lp_rows.size());
    for (const auto& c : socs)
        m += static_cast<int>(c.size());
    s.G = Mat::Zero(m, nk);
    s.h.resize(m);
    int at = 0;
    auto put = [&](const Row& row) {
        for (const auto& [j, v] : row.coef)
            s.G(at, j) -= v;
        s.h(at) = row.offset;
        s.cone_origin.push_back(row.origin);
        ++at;
    };
    for (const auto& row : lp_rows)
        put(row);
    s.cones.m_lp = static_cast<int>(lp_rows.size());
    for (const auto& c : socs) {
        s.cones.soc_start.push_back(at);
        s.cones.soc_dim.push_back(static_cast<int>(c.size()));
        for (const auto& row : c)
            put(row);
    }
    s.cones.m = m;
    return out;
}

// Ruiz equilibration; rows of one second-order cone share a factor.
struct Equilibration {
    rvec col, row_eq, row_cone;
};

Equilibration equilibrate(Standard& s) {
    const int n = s.n, pe = static_cast<int>(s.A.rows()), m = s.cones.m;
    Equilibration e{rvec::Ones(n), rvec::Ones(pe), rvec::Ones(m)};
    auto clamp_scale = [](double v) { return v < 1e-6 ? 1.0 : std::clamp(v, 1e-4, 1e4); };
    for (int it = 0; it < 10; ++it) {
        rvec cn = rvec::Zero(n);
        if (pe)
            cn = cn.cwiseMax(s.A.cwiseAbs().colwise().maxCoeff().transpose());
        if (m)
            cn = cn.cwiseMax(s.G.cwiseAbs().colwise().maxCoeff().transpose());
        rvec rn_eq = pe && n ? rvec(s.A.cwiseAbs().rowwise().maxCoeff()) : rvec::Zero(pe);
        rvec rn_cone = m && n ? rvec(s.G.cwiseAbs().rowwise().maxCoeff()) : rvec::Zero(m);
        for (std::size_t c = 0; c < s.cones.soc_dim.size(); ++c) {
            const int st = s.cones.soc_start[c], d = s.cones.soc_dim[c];
            rn_cone.segment(st, d).setConstant(rn_cone.segment(st, d).maxCoeff());
        }
        rvec dc(n), de(pe), dk(m);
        for (int j = 0; j < n; ++j)
            dc(j) = 1.0 / std::sqrt(clamp_scale(cn(j)));
        for (int i = 0; i < pe; ++i)
            de(i) = 1.0 / std::sqrt(clamp_scale(rn_eq(i)));
        for (int i = 0; i < m; ++i)
            dk(i) = 1.0 / std::sqrt(clamp_scale(rn_cone(i)));
        s.A = de.asDiagonal() * s.A * dc.asDiagonal();
        s.G = dk.asDiagonal() * s.G * dc.asDiagonal();
        e.col = e.col.cwiseProduct(dc);
        e.row_eq = e.row_eq.cwiseProduct(de);
        e.row_cone = e.row_cone.cwiseProduct(dk);
        const double worst = std::max({n ? (cn.array() - 1.0).abs().maxCoeff() : 0.0,
                                       pe ? (rn_eq.array() - 1.0).abs().maxCoeff() : 0.0,
                                       m ? (rn_cone.array() - 1.0).abs().maxCoeff() : 0.0});
        if (worst < 0.1)
            break;
    }
    s.c = s.c.cwiseProduct(e.col);
    s.b = s.b.cwiseProduct(e.row_eq);
    s.h = s.h.cwiseProduct(e.row_cone);
    return e;
}

// ---------------------------------------------------------------- main loop

struct IpmResult {
    SolveStatus status = SolveStatus::iteration_limit;
    rvec x, y, z;  // original (unequilibrated) units; certificates for infeasible/unbounded
    double gap = 0.0;
    int iterations = 0;
    std::string message;
};

double inf_norm(const rvec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

IpmResult run_ipm(const Standard& orig, const SolverSettings& settings) {
    Standard s = orig;
    const Equilibration eq = equilibrate(s);
    const Cones& k = s.cones;
    const int n = s.n, pe = static_cast<int>(s.A.rows()), m = k.m;
    const double nu = k.degree();

    const double b_scale = std::max({1.0, inf_norm(orig.b), inf_norm(orig.h)});
    const double c_scale = std::max(1.0, inf_norm(orig.c));

    IpmResult res;
    Kkt kkt(s);
    Scaling w = Scaling::identity(k);
    if (!kkt.factor(w)) {
        res.message = "initial KKT factorization failed";
        return res;
    }

    rvec x, y, z, sl;
    {
        rvec dx, dy, dz;
        if (!kkt.solve(rvec::Zero(n), s.b, s.h, dx, dy, dz)) {
            res.message = "initial primal solve failed";
            return res;
        }
        x = dx;
        bring_to_cone(k, -dz, sl);
        if (!kkt.solve(-s.c, rvec::Zero(pe), rvec::Zero(m), dx, dy, dz)) {
            res.message = "initial dual solve failed";
            return res;
        }
        y = dy;
        bring_to_cone(k, dz, z);
    }
    double tau = 1.0, kappa = 1.0;

    // Unscaling helpers: x = Dc x~, y = De y~, z = Dk z~, s = Dk^-1 s~.
    auto unscale = [&](const rvec& xs, const rvec& ys, const rvec& zs, double t, rvec& xo, rvec& yo, rvec& zo) {
        xo = eq.col.cwiseProduct(xs) / t;
        yo = eq.row_eq.cwiseProduct(ys) / t;
        zo = eq.row_cone.cwiseProduct(zs) / t;
    };

    struct Best {
        rvec x, y, z;
        double tau = 1.0;
        double merit = kInf;
    } best;

    for (int iter = 0; iter <= settings.max_iterations; ++iter) {
        res.iterations = iter;
        // Residuals of the homogeneous embedding (equilibrated space).
        const rvec rx = s.A.transpose() * y + s.G.transpose() * z + s.c * tau;
        const rvec ry = s.A * x - s.b * tau;
        const rvec rz = s.G * x + sl - s.h * tau;
        const double cx = s.c.dot(x), by = s.b.dot(y), hz = s.h.dot(z);
        const double rt = cx + by + hz + kappa;
        const double mu = (sl.dot(z) + tau * kappa) / (nu + 1.0);

        // Original-space measures.
        const double pres = std::max(inf_norm(eq.row_eq.cwiseInverse().cwiseProduct(ry)),
                                     inf_norm(eq.row_cone.cwiseInverse().cwiseProduct(rz))) / tau / b_scale;
        const double dres = inf_norm(eq.col.cwiseInverse().cwiseProduct(rx)) / tau / c_scale;
        const double pcost = cx / tau;
        const double dcost = -(by + hz) / tau;
        const double gap = sl.dot(z) / (tau * tau);
        double relgap = kInf;
        if (pcost < 0)
            relgap = gap / -pcost;
        else if (dcost > 0)
            relgap = gap / dcost;
        res.gap = std::isfinite(relgap) ? relgap : gap;

        if (settings.verbose)
            std::fprintf(stderr, "%3d pcost %+.6e dcost %+.6e gap %.2e pres %.2e dres %.2e k/t %.2e mu %.2e\n", iter,
                         pcost, dcost, gap, pres, dres, kappa / tau, mu);

        const double merit = std::max({pres, dres, std::min(relgap, gap)});
        if (std::isfinite(merit) && merit < best.merit)
            best = {x, y, z, tau, merit};

        if (pres <= settings.feasibility_tol && dres <= settings.feasibility_tol &&
            (relgap <= settings.gap_tol || gap <= 1e-6 * settings.gap_tol)) {
            unscale(x, y, z, tau, res.x, res.y, res.z);
            res.status = SolveStatus::optimal;
            return res;
        }

        // Certificates (scale invariant ratios in original units).
        {
            rvec yo, zo, xo;
            unscale(x, y, z, 1.0, xo, yo, zo);
            const double bz = orig.b.dot(yo) + orig.h.dot(zo);
            if (bz < 0 && kappa > tau) {
                const double r = (orig.A.transpose() * yo + orig.G.transpose() * zo).norm() / -bz;
                if (r <= settings.feasibility_tol) {
                    res.status = SolveStatus::infeasible;
                    res.x = rvec::Zero(orig.n);
                    res.y = yo / -bz;
                    res.z = zo / -bz;
                    return res;
                }
            }
            const double cxo = orig.c.dot(xo);
            if (cxo < 0 && kappa > tau) {
                const rvec so = eq.row_cone.cwiseInverse().cwiseProduct(sl);
                const double r =
                    std::max((orig.A * xo).norm(), (orig.G * xo + so).norm()) / -cxo;
                if (r <= settings.feasibility_tol) {
                    res.status = SolveStatus::unbounded;
                    res.x = xo / -cxo;
                    res.y = rvec::Zero(pe);
                    res.z = rvec::Zero(m);
                    return res;
                }
            }
        }
        if (iter == settings.max_iterations)
            break;

        if (!update_scaling(k, sl, z, w) || !kkt.factor(w)) {
            res.message = "scaling update failed at iteration " + std::to_string(iter);
            break;
        }
        const rvec lambda = apply_w(k, w, z);

        rvec x1, y1, z1;
        if (!kkt.solve(-s.c, s.b, s.h, x1, y1, z1)) {
            res.message = "KKT solve failed";
            break;
        }
        const double den = s.c.dot(x1) + s.b.dot(y1) + s.h.dot(z1) - kappa / tau;

        auto direction = [&](double sigma, const rvec& u, double ukap, rvec& dx, rvec& dy, rvec& dz, double& dtau,
                             double& dkap, rvec& ds) {
            rvec x2, y2, z2;
            const rvec rhs_z = -(1.0 - sigma) * rz - apply_w(k, w, u);
            if (!kkt.solve(-(1.0 - sigma) * rx, -(1.0 - sigma) * ry, rhs_z, x2, y2, z2))
                return false;
            dtau = (-(1.0 - sigma) * rt - ukap / tau - (s.c.dot(x2) + s.b.dot(y2) + s.h.dot(z2))) / den;
            dx = x2 + dtau * x1;
            dy = y2 + dtau * y1;
            dz = z2 + dtau * z1;
            dkap = (ukap - kappa * dtau) / tau;
            ds = apply_w(k, w, u - apply_w(k, w, dz));
            return true;
        };
        auto step_length = [&](const rvec& ds, const rvec& dz, double dtau, double dkap) {
            double a = std::min(max_step(k, sl, ds), max_step(k, z, dz));
            if (dtau < 0)
                a = std::min(a, -tau / dtau);
            if (dkap < 0)
                a = std::min(a, -kappa / dkap);
            return a;
        };

        // Predictor.
        rvec dx, dy, dz, ds;
        double dtau, dkap;
        if (!direction(0.0, -lambda, -kappa * tau, dx, dy, dz, dtau, dkap, ds)) {
            res.message = "affine direction failed";
            break;
        }
        const double a_aff = std::min(1.0, step_length(ds, dz, dtau, dkap));
        const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 1e-4, 1.0);

        // Corrector.
        const rvec ds_w = apply_w_inv(k, w, ds);
        const rvec dz_w = apply_w(k, w, dz);
        rvec target = -jordan(k, lambda, lambda) - jordan(k, ds_w, dz_w);
        add_identity(k, target, sigma * mu);
        const rvec u = cone_divide(k, lambda, target);
        const double ukap = -kappa * tau - dkap * dtau + sigma * mu;
        if (!direction(sigma, u, ukap, dx, dy, dz, dtau, dkap, ds)) {
            res.message = "combined direction failed";
            break;
        }
        const double alpha = std::min(0.999, 0.99 * step_length(ds, dz, dtau, dkap));
        if (!(alpha > 1e-10) || !std::isfinite(alpha)) {
            res.message = "step length collapsed at iteration " + std::to_string(iter);
            break;
        }
        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        sl += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkap;
        if (!x.allFinite() || !z.allFinite() || !sl.allFinite() || !(tau > 0) || !(kappa > 0)) {
            res.message = "iterate lost interiority";
            break;
        }
    }

    // No certificate: report the best iterate seen.
    if (best.x.size() == n)
        unscale(best.x, best.y, best.z, best.tau, res.x, res.y, res.z);
    else
        res.x = rvec::Zero(n), res.y = rvec::Zero(pe), res.z = rvec::Zero(m);
    res.status = SolveStatus::iteration_limit;
    if (res.message.empty())
        res.message = "iteration limit reached";
    return res;
}

}  // namespace

SocScaling nt_scaling(const rvec& s, const rvec& z) {
    if (s.size() != z.size() || s.size() < 1)
        throw ValidationError("scaling needs two cone points of equal positive length");
    Cones k;
    k.m = static_cast<int>(s.size());
    k.soc_start = {0};
    k.soc_dim = {k.m};
    Scaling w = Scaling::identity(k);
    if (!update_scaling(k, s, z, w))
        throw ValidationError("scaling needs strictly interior cone points");
    return {w.soc[0].eta, w.soc[0].a, w.soc[0].q};
}

namespace {

Scaling single_cone(const SocScaling& o) {
    Scaling w;
    w.lp_w = rvec(0);
    w.soc.push_back({o.eta, o.a, o.q});
    return w;
}

Cones single_cone_shape(int dim) {
    Cones k;
    k.m = dim;
    k.soc_start = {0};
    k.soc_dim = {dim};
    return k;
}

}  // namespace

rvec SocScaling::apply(const rvec& v) const {
    return apply_w(single_cone_shape(static_cast<int>(q.size()) + 1), single_cone(*this), v);
}

rvec SocScaling::apply_inverse(const rvec& v) const {
    return apply_w_inv(single_cone_shape(static_cast<int>(q.size()) + 1), single_cone(*this), v);
}

Eigen::MatrixXd SocScaling::squared() const { return soc_w2({eta, a, q}); }

SolveReport InteriorPointSolver::solve(const ConicProgram& program, const SolverSettings& settings) const {
    program.validate();
    if (settings.max_iterations < 0 || !(settings.feasibility_tol > 0) || !(settings.gap_tol > 0))
        throw ValidationError("solver settings must have positive tolerances and a non-negative iteration limit");

    const int n = program.dimension();
    SolveReport rep;
    rep.x = rvec::Zero(n);
    for (const auto& b : program.blocks)
        rep.duals.push_back(rvec::Zero(b.rows()));

    Presolved pre = presolve(program);
    if (pre.trivially_infeasible) {
        rep.status = SolveStatus::infeasible;
        rep.message = pre.message;
        return rep;
    }
    const Standard& st = pre.problem;

    IpmResult r;
    if (st.A.rows() == 0 && st.cones.m == 0) {
        // No constraints touch the kept variables.
        r.x = rvec::Zero(st.n);
        r.y = rvec::Zero(0);
        r.z = rvec::Zero(0);
        r.status = st.c.isZero(0.0) ? SolveStatus::optimal : SolveStatus::unbounded;
        if (r.status == SolveStatus::unbounded)
            r.x = -st.c / st.c.norm();
    } else {
        r = run_ipm(st, settings);
    }
    rep.iterations = r.iterations;
    rep.gap = r.gap;
    rep.message = r.message;

    if (r.status == SolveStatus::optimal && !pre.free_columns.empty()) {
        // Remaining problem feasible and an unconstrained variable carries cost.
        rep.status = SolveStatus::unbounded;
        for (int j : pre.free_columns)
            rep.x(j) = program.objective(j) > 0 ? 1.0 : -1.0;
        rep.objective_value = kInf;
        rep.message = "variable with nonzero objective appears in no constraint";
        return rep;
    }

    rep.status = r.status;
    for (int j = 0; j < st.n; ++j)
        rep.x(pre.kept_columns[j]) = r.x(j);
    // Map multipliers back: sum_b F_b' nu_b + objective = 0 with nu = -y on zero blocks and z on cones.
    for (std::size_t i = 0; i < st.eq_origin.size(); ++i)
        rep.duals[st.eq_origin[i].block](st.eq_origin[i].row) = -r.y(static_cast<int>(i));
    for (std::size_t i = 0; i < st.cone_origin.size(); ++i)
        rep.duals[st.cone_origin[i].block](st.cone_origin[i].row) = r.z(static_cast<int>(i));

    rep.objective_value = program.objective.dot(rep.x);
    rep.primal_residual = primal_violation(program, rep.x);
    rep.dual_residual = dual_violation(program, rep.duals);
    if (rep.status == SolveStatus::infeasible)
        rep.objective_value = -kInf;
    if (rep.status == SolveStatus::unbounded)
        rep.objective_value = kInf;
    return rep;
}

}  // namespace isac::conic
