#include "isac/conic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "isac/error.hpp"

namespace isac::conic {

const char* to_string(ConeKind kind) {
    switch (kind) {
    case ConeKind::zero:
        return "zero";
    case ConeKind::nonnegative:
        return "nonnegative";
    case ConeKind::second_order:
        return "second_order";
    }
    return "unknown";
}

const char* to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::optimal:
        return "optimal";
    case SolveStatus::infeasible:
        return "infeasible";
    case SolveStatus::unbounded:
        return "unbounded";
    case SolveStatus::iteration_limit:
        return "iteration_limit";
    }
    return "unknown";
}

int VariableLayout::add(const std::string& name, int dim) {
    if (dim < 0)
        throw ValidationError("variable group '" + name + "' has negative dimension");
    if (contains(name))
        throw ValidationError("duplicate variable group '" + name + "'");
    entries_.push_back({name, size_, dim});
    size_ += dim;
    return entries_.back().offset;
}

bool VariableLayout::contains(const std::string& name) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

const VariableLayout::Entry& VariableLayout::at(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name)
            return e;
    throw ValidationError("unknown variable group '" + name + "'");
}

int ConicProgram::count_blocks(ConeKind kind) const {
    return static_cast<int>(
        std::count_if(blocks.begin(), blocks.end(), [&](const ConeBlock& b) { return b.kind == kind; }));
}

int ConicProgram::count_rows(ConeKind kind) const {
    int n = 0;
    for (const auto& b : blocks)
        if (b.kind == kind)
            n += b.rows();
    return n;
}

void ConicProgram::validate() const {
    const int n = dimension();
    if (objective.size() != n)
        throw ValidationError("objective has " + std::to_string(objective.size()) + " entries, layout has " +
                              std::to_string(n));
    if (!objective.allFinite())
        throw ValidationError("objective has non-finite entries");
    std::set<std::string> names;
    for (const auto& b : blocks) {
        if (!names.insert(b.name).second)
            throw ValidationError("duplicate constraint block '" + b.name + "'");
        if (b.map.cols() != n)
            throw ValidationError("block '" + b.name + "' has " + std::to_string(b.map.cols()) +
                                  " columns, layout has " + std::to_string(n));
        if (b.offset.size() != b.map.rows())
            throw ValidationError("block '" + b.name + "' offset length does not match its rows");
        if (b.kind == ConeKind::second_order && b.rows() < 1)
            throw ValidationError("second-order block '" + b.name + "' is empty");
        if (!b.offset.allFinite())
            throw ValidationError("block '" + b.name + "' has non-finite offsets");
        for (int k = 0; k < b.map.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(b.map, k); it; ++it)
                if (!std::isfinite(it.value()))
                    throw ValidationError("block '" + b.name + "' has non-finite coefficients");
    }
}

std::string ConicProgram::dump() const {
    std::ostringstream os;
    os.precision(17);
    os << "maximize c'x\n";
    os << "variables " << dimension() << "\n";
    for (const auto& e : layout.entries())
        os << "  " << e.name << " offset " << e.offset << " dim " << e.dim << "\n";
    os << "objective";
    for (int i = 0; i < objective.size(); ++i)
        if (objective(i) != 0.0)
            os << " " << i << ":" << objective(i);
    os << "\n";
    for (const auto& b : blocks) {
        os << "block " << b.name << " " << to_string(b.kind) << " rows " << b.rows() << "\n";
        for (int r = 0; r < b.rows(); ++r) {
            os << "  " << r << " [" << b.offset(r) << "]";
            for (SparseMatrix::InnerIterator it(b.map, r); it; ++it)
                os << " " << it.col() << ":" << it.value();
            os << "\n";
        }
    }
    return os.str();
}

BlockBuilder::BlockBuilder(std::string name, ConeKind kind, int dimension)
    : name_(std::move(name)), kind_(kind), dimension_(dimension) {}

void BlockBuilder::add_row(const SparseRow& coefficients, double offset) {
    if (coefficients.size() != dimension_)
        throw ValidationError("row width " + std::to_string(coefficients.size()) + " does not match dimension " +
                              std::to_string(dimension_) + " in block '" + name_ + "'");
    const int r = rows();
    for (SparseRow::InnerIterator it(coefficients); it; ++it)
        if (it.value() != 0.0)
            triplets_.emplace_back(r, static_cast<int>(it.index()), it.value());
    offsets_.push_back(offset);
}

void BlockBuilder::add_row(const std::vector<std::pair<int, double>>& coefficients, double offset) {
    const int r = rows();
    for (const auto& [col, v] : coefficients) {
        if (col < 0 || col >= dimension_)
            throw ValidationError("column " + std::to_string(col) + " out of range in block '" + name_ + "'");
        if (v != 0.0)
            triplets_.emplace_back(r, col, v);
    }
    offsets_.push_back(offset);
}

void BlockBuilder::add_entry_row(int column, double coefficient, double offset) {
    add_row(std::vector<std::pair<int, double>>{{column, coefficient}}, offset);
}

ConeBlock BlockBuilder::build() const {
    ConeBlock b;
    b.name = name_;
    b.kind = kind_;
    b.map.resize(rows(), dimension_);
    b.map.setFromTriplets(triplets_.begin(), triplets_.end());
    b.map.makeCompressed();
    b.offset = Eigen::Map<const rvec>(offsets_.data(), static_cast<Eigen::Index>(offsets_.size()));
    return b;
}

ConicProgram assemble(VariableLayout layout, const std::vector<ConstraintBuilder>& builders, rvec objective) {
    ConicProgram p;
    p.layout = std::move(layout);
    p.objective = std::move(objective);
    for (const auto& b : builders) {
        ConeBlock block = b.build(p.layout);
        if (block.name.empty())
            block.name = b.name;
        p.blocks.push_back(std::move(block));
    }
    p.validate();
    return p;
}

ComplexEmbedding::ComplexEmbedding(std::vector<int> lengths, int base_offset)
    : lengths_(std::move(lengths)), base_(base_offset) {
    int at = base_;
    for (int n : lengths_) {
        if (n < 0)
            throw ValidationError("complex vector length must be non-negative");
        offsets_.push_back(at);
        at += 2 * n;
    }
    dimension_ = at - base_;
}

std::pair<SparseRow, SparseRow> ComplexEmbedding::functional(const cvec& h, int k, int width) const {
    if (k < 0 || k >= count())
        throw ValidationError("complex vector index out of range");
    const int n = lengths_[k];
    if (h.size() != n)
        throw ValidationError("functional length does not match embedded vector");
    if (offsets_[k] + 2 * n > width)
        throw ValidationError("embedding does not fit in the requested row width");
    // h^H w = sum (hr - j hi)(wr + j wi): real part hr.wr + hi.wi, imaginary part hr.wi - hi.wr.
    SparseRow re(width), im(width);
    re.reserve(2 * n);
    im.reserve(2 * n);
    for (int i = 0; i < n; ++i) {
        if (h(i).real() != 0.0)
            re.insert(real_index(k, i)) = h(i).real();
        if (h(i).imag() != 0.0)
            im.insert(real_index(k, i)) = -h(i).imag();
    }
    for (int i = 0; i < n; ++i) {
        if (h(i).imag() != 0.0)
            re.insert(imag_index(k, i)) = h(i).imag();
        if (h(i).real() != 0.0)
            im.insert(imag_index(k, i)) = h(i).real();
    }
    return {re, im};
}

void ComplexEmbedding::embed_into(const std::vector<cvec>& vectors, rvec& x) const {
    if (static_cast<int>(vectors.size()) != count())
        throw ValidationError("wrong number of complex vectors to embed");
    if (x.size() < base_ + dimension_)
        throw ValidationError("target vector too short for embedding");
    for (int k = 0; k < count(); ++k) {
        if (vectors[k].size() != lengths_[k])
            throw ValidationError("complex vector length mismatch in embedding");
        for (int i = 0; i < lengths_[k]; ++i) {
            x(real_index(k, i)) = vectors[k](i).real();
            x(imag_index(k, i)) = vectors[k](i).imag();
        }
    }
}

rvec ComplexEmbedding::embed(const std::vector<cvec>& vectors) const {
    rvec x = rvec::Zero(base_ + dimension_);
    embed_into(vectors, x);
    return x;
}

std::vector<cvec> ComplexEmbedding::reconstruct(const rvec& x) const {
    if (x.size() < base_ + dimension_)
        throw ValidationError("vector too short to reconstruct embedding");
    std::vector<cvec> out;
    out.reserve(count());
    for (int k = 0; k < count(); ++k) {
        cvec v(lengths_[k]);
        for (int i = 0; i < lengths_[k]; ++i)
            v(i) = {x(real_index(k, i)), x(imag_index(k, i))};
        out.push_back(std::move(v));
    }
    return out;
}

SolveReport CallbackSolver::solve(const ConicProgram& program, const SolverSettings& settings) const {
    program.validate();
    return fn_(program, settings);
}

SolveReport solve(const ConicProgram& program, const SolverSettings& settings) {
    return InteriorPointSolver{}.solve(program, settings);
}

double cone_distance(ConeKind kind, const Eigen::Ref<const rvec>& v) {
    switch (kind) {
    case ConeKind::zero:
        return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    case ConeKind::nonnegative: {
        double d = 0.0;
        for (int i = 0; i < v.size(); ++i)
            d = std::max(d, -v(i));
        return d;
    }
    case ConeKind::second_order: {
        if (v.size() == 0)
            return 0.0;
        const double t = v(0);
        const double r = v.size() > 1 ? v.tail(v.size() - 1).norm() : 0.0;
        if (r <= t)
            return 0.0;
        if (r <= -t)
            return std::hypot(t, r);
        // Projection onto the cone boundary.
        return (r - t) / std::sqrt(2.0);
    }
    }
    return 0.0;
}

double primal_violation(const ConicProgram& program, const rvec& x) {
    if (x.size() != program.dimension())
        throw ValidationError("point dimension does not match program");
    double scale = 1.0;
    double worst = 0.0;
    for (const auto& b : program.blocks) {
        if (b.rows() == 0)
            continue;
        scale = std::max(scale, b.offset.cwiseAbs().maxCoeff());
        const rvec v = b.map * x + b.offset;
        worst = std::max(worst, cone_distance(b.kind, v));
    }
    return worst / scale;
}

double dual_violation(const ConicProgram& program, const std::vector<rvec>& duals) {
    if (duals.size() != program.blocks.size())
        throw ValidationError("one dual vector per block is required");
    rvec r = program.objective;
    for (std::size_t i = 0; i < duals.size(); ++i) {
        const auto& b = program.blocks[i];
        if (duals[i].size() != b.rows())
            throw ValidationError("dual length mismatch for block '" + b.name + "'");
        r += b.map.transpose() * duals[i];
    }
    const double scale = std::max(1.0, program.objective.size() ? program.objective.cwiseAbs().maxCoeff() : 0.0);
    return (r.size() ? r.cwiseAbs().maxCoeff() : 0.0) / scale;
}

}  // namespace isac::conic
