#include "sabrfem/assembly.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/SparseExtra>

#include "sabrfem/errors.hpp"

namespace sabrfem {

Axis Axis::mesh(Basis1D basis) {
    Axis a;
    a.active_ = basis.dofs();
    a.basis_ = std::move(basis);
    return a;
}

Axis Axis::point(double coordinate) {
    if (!std::isfinite(coordinate)) throw ValidationError("coordinate", "point axis needs a finite coordinate");
    Axis a;
    a.point_ = coordinate;
    a.active_ = {0};
    return a;
}

const Basis1D& Axis::basis() const {
    if (!basis_) throw UnsupportedConfiguration("point axis has no mesh basis");
    return *basis_;
}

int Axis::n_all() const noexcept { return basis_ ? basis_->mesh().n_nodes() : 1; }

int Axis::n_active() const noexcept { return static_cast<int>(active_.size()); }

std::vector<double> Axis::coordinates() const {
    return basis_ ? basis_->mesh().nodes() : std::vector<double>{point_};
}

namespace {

double block_entry(BlockKind kind, WeightSpec w, const Cell& cell, int p_test, int q_trial) {
    const bool test_d = kind == BlockKind::S || kind == BlockKind::BT;
    const bool trial_d = kind == BlockKind::S || kind == BlockKind::B;
    const LocalShape p{p_test, test_d};
    const LocalShape q{q_trial, trial_d};
    if (w.family == WeightSpec::Family::power) return weighted_moment(cell, p, q, w.param);
    return exp_moment(cell, p, q, w.param);
}

double point_weight(WeightSpec w, double coordinate) {
    if (w.family == WeightSpec::Family::exponential) return std::exp(w.param * coordinate);
    if (w.param == 0.0) return 1.0;
    if (coordinate <= 0.0) throw ValidationError("weight", "power weight at a non-positive point coordinate");
    return std::pow(coordinate, w.param);
}

}  // namespace

SpMat assemble_1d_rect(BlockKind kind, WeightSpec weight, const Axis& axis) {
    if (axis.is_point()) {
        SpMat m(1, 1);
        if (kind == BlockKind::M) m.insert(0, 0) = point_weight(weight, axis.point_coordinate());
        m.makeCompressed();
        return m;
    }
    const Basis1D& basis = axis.basis();
    const DyadicMesh& mesh = basis.mesh();
    if (weight.family == WeightSpec::Family::power && weight.param != 0.0 && mesh.interval.lo < 0.0) {
        throw ValidationError("weight", "power weight on an axis extending below 0");
    }
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell cell = mesh.cell(c);
        for (int p = 0; p < 2; ++p) {
            const int row = basis.dof_of_node(c + p);
            if (row < 0) continue;
            for (int q = 0; q < 2; ++q) trip.emplace_back(row, c + q, block_entry(kind, weight, cell, p, q));
        }
    }
    SpMat m(basis.size(), mesh.n_nodes());
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

SpMat assemble_1d(BlockKind kind, WeightSpec weight, const Axis& axis) {
    const SpMat rect = assemble_1d_rect(kind, weight, axis);
    if (axis.is_point()) return rect;
    const Basis1D& basis = axis.basis();
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < rect.outerSize(); ++k) {
        const int col = basis.dof_of_node(k);
        if (col < 0) continue;
        for (SpMat::InnerIterator it(rect, k); it; ++it) trip.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
    SpMat m(basis.size(), basis.size());
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

std::vector<KroneckerTerm> mass_terms(double mu) {
    return {{"M", 1.0, BlockKind::M, WeightSpec::power(mu), BlockKind::M, WeightSpec::unit()}};
}

std::vector<KroneckerTerm> stiffness_terms(const SabrParams& p, double mu) {
    const CoefficientSet c = operator_coefficients(p, mu);
    const double s = 2.0 * p.beta + mu;
    const double h = p.beta + mu;
    return {
        {"Qxx S_x(2b+mu) M_y(e^2y)", c.Qxx, BlockKind::S, WeightSpec::power(s), BlockKind::M, WeightSpec::exponential(2.0)},
        {"Qxy B_x(b+mu) B_y(e^y)^T", c.Qxy, BlockKind::B, WeightSpec::power(h), BlockKind::BT, WeightSpec::exponential(1.0)},
        {"Qyy M_x(mu) S_y(1)", c.Qyy, BlockKind::M, WeightSpec::power(mu), BlockKind::S, WeightSpec::unit()},
        {"cx1 B_x(2b+mu-1) M_y(e^2y)", c.cx1, BlockKind::B, WeightSpec::power(s - 1.0), BlockKind::M, WeightSpec::exponential(2.0)},
        {"cx2 B_x(b+mu) M_y(e^y)", c.cx2, BlockKind::B, WeightSpec::power(h), BlockKind::M, WeightSpec::exponential(1.0)},
        {"cy M_x(mu) B_y(1)", c.cy, BlockKind::M, WeightSpec::power(mu), BlockKind::B, WeightSpec::unit()},
    };
}

std::vector<KroneckerTerm> vnorm_terms(const SabrParams& p, double mu) {
    const double s = 2.0 * p.beta + mu;
    return {
        {"S_x(2b+mu) M_y(e^2y)", 1.0, BlockKind::S, WeightSpec::power(s), BlockKind::M, WeightSpec::exponential(2.0)},
        {"M_x(mu) S_y(1)", 1.0, BlockKind::M, WeightSpec::power(mu), BlockKind::S, WeightSpec::unit()},
        {"M_x(mu) M_y(1)", 1.0, BlockKind::M, WeightSpec::power(mu), BlockKind::M, WeightSpec::unit()},
    };
}

SpMat assemble_terms_rect(const std::vector<KroneckerTerm>& terms, const Axis& x, const Axis& y) {
    SpMat sum(x.n_active() * y.n_active(), x.n_all() * y.n_all());
    for (const auto& t : terms) {
        if (t.coeff == 0.0) continue;
        const SpMat bx = assemble_1d_rect(t.kind_x, t.weight_x, x);
        const SpMat by = assemble_1d_rect(t.kind_y, t.weight_y, y);
        SpMat k = Eigen::kroneckerProduct(bx, by);
        sum += t.coeff * k;
    }
    sum.prune(0.0);
    sum.makeCompressed();
    return sum;
}

SpMat active_columns(const SpMat& rect, const Axis& x, const Axis& y) {
    const int ny = y.n_all();
    std::vector<int> col_map(static_cast<std::size_t>(x.n_all()) * ny, -1);
    int k = 0;
    for (int ix : x.active_nodes())
        for (int iy : y.active_nodes()) col_map[static_cast<std::size_t>(ix) * ny + iy] = k++;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(rect.nonZeros());
    for (int c = 0; c < rect.outerSize(); ++c) {
        const int col = col_map[c];
        if (col < 0) continue;
        for (SpMat::InnerIterator it(rect, c); it; ++it) trip.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
    SpMat m(rect.rows(), k);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    return m;
}

Eigen::VectorXd TensorOperator::restrict_full(const Eigen::Ref<const Eigen::VectorXd>& full) const {
    if (full.size() != n_all()) throw ValidationError("full", "length does not match the full node count");
    Eigen::VectorXd out(n_active());
    for (int k = 0; k < n_active(); ++k) out[k] = full[active_to_full[k]];
    return out;
}

Eigen::VectorXd TensorOperator::expand(const Eigen::Ref<const Eigen::VectorXd>& active,
                                       const Eigen::Ref<const Eigen::VectorXd>& boundary) const {
    if (active.size() != n_active()) throw ValidationError("active", "length does not match the dof count");
    if (boundary.size() != n_all()) throw ValidationError("boundary", "length does not match the full node count");
    Eigen::VectorXd full = boundary;
    for (int k = 0; k < n_active(); ++k) full[active_to_full[k]] = active[k];
    return full;
}

TensorOperator assemble_operator(const SabrParams& p, double mu, const Axis& x, const Axis& y) {
    require_valid(p);
    const double m = resolve_mu(p.beta, mu);
    TensorOperator op{x, y, {}, {}, {}, {}, {}, mass_terms(m), stiffness_terms(p, m), vnorm_terms(p, m), {}};
    op.mass_coupling = assemble_terms_rect(op.mass_factors, x, y);
    op.stiffness_coupling = assemble_terms_rect(op.stiffness_factors, x, y);
    op.mass = active_columns(op.mass_coupling, x, y);
    op.stiffness = active_columns(op.stiffness_coupling, x, y);
    op.vnorm_gram = active_columns(assemble_terms_rect(op.gram_factors, x, y), x, y);
    const int ny = y.n_all();
    for (int ix : x.active_nodes())
        for (int iy : y.active_nodes()) op.active_to_full.push_back(ix * ny + iy);
    return op;
}

SpMat assemble_mass(double mu, const Axis& x, const Axis& y) {
    return active_columns(assemble_terms_rect(mass_terms(mu), x, y), x, y);
}

SpMat assemble_stiffness(const SabrParams& p, double mu, const Axis& x, const Axis& y) {
    require_valid(p);
    return active_columns(assemble_terms_rect(stiffness_terms(p, resolve_mu(p.beta, mu)), x, y), x, y);
}

SpMat assemble_vnorm_gram(const SabrParams& p, double mu, const Axis& x, const Axis& y) {
    require_valid(p);
    return active_columns(assemble_terms_rect(vnorm_terms(p, resolve_mu(p.beta, mu)), x, y), x, y);
}

void write_matrix_market(const SpMat& m, const std::string& path) {
    if (!Eigen::saveMarket(m, path)) throw IoError("cannot write matrix to " + path);
}

}  // namespace sabrfem
