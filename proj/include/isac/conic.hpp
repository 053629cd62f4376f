#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "isac/geometry.hpp"

namespace isac::conic {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseRow = Eigen::SparseVector<double>;

enum class ConeKind { zero, nonnegative, second_order };

const char* to_string(ConeKind kind);

/// Constraint `map * x + offset` in the cone. For second_order the first row is the scalar bound.
struct ConeBlock {
    std::string name;
    ConeKind kind = ConeKind::nonnegative;
    SparseMatrix map;
    rvec offset;

    int rows() const { return static_cast<int>(map.rows()); }
};

/// Named contiguous groups of real decision variables.
class VariableLayout {
public:
    struct Entry {
        std::string name;
        int offset;
        int dim;
    };

    /// Appends a group and returns its offset. Throws ValidationError on a duplicate name or dim < 0.
    int add(const std::string& name, int dim);

    bool contains(const std::string& name) const;
    const Entry& at(const std::string& name) const;
    int offset(const std::string& name) const { return at(name).offset; }
    int dim(const std::string& name) const { return at(name).dim; }
    int size() const { return size_; }
    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
    int size_ = 0;
};

/// maximize objective' x  subject to  map_b x + offset_b in K_b  for every block b.
struct ConicProgram {
    VariableLayout layout;
    rvec objective;
    std::vector<ConeBlock> blocks;

    int dimension() const { return layout.size(); }
    int count_blocks(ConeKind kind) const;
    int count_rows(ConeKind kind) const;

    /// Throws ValidationError on any structural inconsistency.
    void validate() const;

    /// Plain-text standard-form listing.
    std::string dump() const;
};

/// Accumulates sparse rows for one block.
class BlockBuilder {
public:
    BlockBuilder(std::string name, ConeKind kind, int dimension);

    void add_row(const SparseRow& coefficients, double offset);
    void add_row(const std::vector<std::pair<int, double>>& coefficients, double offset);
    /// Row with a single coefficient.
    void add_entry_row(int column, double coefficient, double offset);
    /// Row with no variable dependence.
    void add_constant_row(double offset) { add_row(std::vector<std::pair<int, double>>{}, offset); }

    int rows() const { return static_cast<int>(offsets_.size()); }
    ConeBlock build() const;

private:
    std::string name_;
    ConeKind kind_;
    int dimension_;
    std::vector<Eigen::Triplet<double>> triplets_;
    std::vector<double> offsets_;
};

struct ConstraintBuilder {
    std::string name;
    std::function<ConeBlock(const VariableLayout&)> build;
};

/// Runs each builder against the layout, keeping builder order, and checks the result.
/// Throws ValidationError on inconsistent dimensions or duplicate block names.
ConicProgram assemble(VariableLayout layout, const std::vector<ConstraintBuilder>& builders, rvec objective);

/// Real layout of a list of complex vectors: vector k of length n occupies 2n reals, [Re; Im].
class ComplexEmbedding {
public:
    ComplexEmbedding() = default;
    ComplexEmbedding(std::vector<int> lengths, int base_offset = 0);

    int count() const { return static_cast<int>(lengths_.size()); }
    int length(int k) const { return lengths_.at(k); }
    int offset(int k) const { return offsets_.at(k); }
    int real_index(int k, int i) const { return offsets_[k] + i; }
    int imag_index(int k, int i) const { return offsets_[k] + lengths_[k] + i; }
    int dimension() const { return dimension_; }

    /// Rows (re, im) of total width `width` with Re(h^H w_k) = re . x and Im(h^H w_k) = im . x.
    std::pair<SparseRow, SparseRow> functional(const cvec& h, int k, int width) const;

    void embed_into(const std::vector<cvec>& vectors, rvec& x) const;
    rvec embed(const std::vector<cvec>& vectors) const;
    std::vector<cvec> reconstruct(const rvec& x) const;

private:
    std::vector<int> lengths_;
    std::vector<int> offsets_;
    int base_ = 0;
    int dimension_ = 0;
};

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(SolveStatus status);

struct SolverSettings {
    double feasibility_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iterations = 200;
    bool verbose = false;
};

struct SolveReport {
    SolveStatus status = SolveStatus::iteration_limit;
    rvec x;
    double objective_value = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;  // relative duality gap (absolute when both costs vanish)
    int iterations = 0;
    /// One multiplier vector per block; sum_b map_b' dual_b + objective = 0 at optimality,
    /// dual_b in K_b for conic blocks. For infeasible programs these hold a Farkas certificate.
    std::vector<rvec> duals;
    std::string message;
};

/// Backend contract shared by the reference solver and any external adapter.
class ConicSolver {
public:
    virtual ~ConicSolver() = default;
    virtual SolveReport solve(const ConicProgram& program, const SolverSettings& settings) const = 0;
    virtual std::string name() const = 0;
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling.
class InteriorPointSolver final : public ConicSolver {
public:
    SolveReport solve(const ConicProgram& program, const SolverSettings& settings) const override;
    std::string name() const override { return "interior-point"; }
};

/// Adapter for an external backend supplied as a callable.
class CallbackSolver final : public ConicSolver {
public:
    using Fn = std::function<SolveReport(const ConicProgram&, const SolverSettings&)>;
    CallbackSolver(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
    SolveReport solve(const ConicProgram& program, const SolverSettings& settings) const override;
    std::string name() const override { return name_; }

private:
    std::string name_;
    Fn fn_;
};

/// Reference solver entry point.
SolveReport solve(const ConicProgram& program, const SolverSettings& settings = {});

/// Euclidean distance of v to the cone of `kind` (infinity-norm for the zero cone).
double cone_distance(ConeKind kind, const Eigen::Ref<const rvec>& v);

/// max_b dist(map_b x + offset_b, K_b) / max(1, max_b |offset_b|_inf).
double primal_violation(const ConicProgram& program, const rvec& x);

/// |sum_b map_b' dual_b + objective|_inf / max(1, |objective|_inf).
double dual_violation(const ConicProgram& program, const std::vector<rvec>& duals);

/// Nesterov-Todd scaling W of one second-order cone pair (s, z), both strictly interior:
/// W z = W^-1 s, W^2 = eta^2 (2 wb wb' - J) with wb = (a, q).
struct SocScaling {
    double eta = 1.0;
    double a = 1.0;
    rvec q;

    rvec apply(const rvec& v) const;
    rvec apply_inverse(const rvec& v) const;
    Eigen::MatrixXd squared() const;
};

/// Throws ValidationError unless s and z are strictly inside the cone and of equal length.
SocScaling nt_scaling(const rvec& s, const rvec& z);

}  // namespace isac::conic
