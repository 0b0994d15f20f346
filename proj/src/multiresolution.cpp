#include "sabrfem/multiresolution.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "sabrfem/errors.hpp"

namespace sabrfem {

std::vector<double> DyadicMesh::nodes() const {
    std::vector<double> out(n_nodes());
    for (int i = 0; i < n_nodes(); ++i) out[i] = node(i);
    return out;
}

DyadicMesh DyadicMesh::coarsened(int levels_down) const {
    if (levels_down < 0 || levels_down > level) throw ValidationError("level", "cannot coarsen below level 0");
    return {interval, level - levels_down, base_cells};
}

DyadicMesh build_mesh(Interval interval, int level, int base_cells) {
    if (!std::isfinite(interval.lo) || !std::isfinite(interval.hi) || !(interval.lo < interval.hi)) {
        throw ValidationError("interval", "need finite a < b");
    }
    if (level < 0 || level > 20) throw ValidationError("level", "must lie in [0, 20]");
    if (base_cells < 1) throw ValidationError("base_cells", "must be >= 1");
    return {interval, level, base_cells};
}

Basis1D::Basis1D(DyadicMesh mesh, Boundary left, Boundary right) : mesh_(mesh), left_(left), right_(right) {
    const int n = mesh_.n_cells();
    for (int i = 0; i <= n; ++i) {
        if (i == 0 && left_ == Boundary::essential_zero) continue;
        if (i == n && right_ == Boundary::essential_zero) continue;
        dofs_.push_back(i);
    }
}

int Basis1D::dof_of_node(int node) const noexcept {
    if (node < 0 || node > mesh_.n_cells()) return -1;
    const int first = left_ == Boundary::essential_zero ? 1 : 0;
    if (node < first) return -1;
    if (node == mesh_.n_cells() && right_ == Boundary::essential_zero) return -1;
    return node - first;
}

Eigen::VectorXd Basis1D::to_nodes(const Eigen::Ref<const Eigen::VectorXd>& coeffs) const {
    if (coeffs.size() != size()) throw ValidationError("coeffs", "length does not match the dof count");
    Eigen::VectorXd nodal = Eigen::VectorXd::Zero(mesh_.n_nodes());
    for (int k = 0; k < size(); ++k) nodal[dofs_[k]] = coeffs[k];
    return nodal;
}

Eigen::VectorXd Basis1D::from_nodes(const Eigen::Ref<const Eigen::VectorXd>& nodal) const {
    if (nodal.size() != mesh_.n_nodes()) throw ValidationError("nodal", "length does not match the node count");
    Eigen::VectorXd c(size());
    for (int k = 0; k < size(); ++k) c[k] = nodal[dofs_[k]];
    return c;
}

Basis1D Basis1D::refined() const { return {{mesh_.interval, mesh_.level + 1, mesh_.base_cells}, left_, right_}; }

Basis1D Basis1D::coarsened() const { return {mesh_.coarsened(1), left_, right_}; }

Eigen::VectorXd HierarchicalCoeffs::flatten() const {
    Eigen::Index total = 0;
    for (const auto& b : blocks) total += b.size();
    Eigen::VectorXd out(total);
    Eigen::Index pos = 0;
    for (const auto& b : blocks) {
        out.segment(pos, b.size()) = b;
        pos += b.size();
    }
    return out;
}

namespace {

bool is_essential(const Basis1D& basis, int node) { return basis.dof_of_node(node) < 0; }

// Lifting update of the coarse nodes of one level (sign = +1 forward, -1 inverse).
void update_coarse(const Basis1D& basis, Eigen::VectorXd& v, int stride, double sign) {
    const int n = basis.mesh().n_cells();
    for (int j = 0; j <= n; j += 2 * stride) {
        if (is_essential(basis, j)) continue;
        double d = 0.0;
        if (j - stride >= 0) d += v[j - stride];
        if (j + stride <= n) d += v[j + stride];
        v[j] += sign * 0.25 * d;
    }
}

}  // namespace

HierarchicalCoeffs to_hierarchical(const Basis1D& basis, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                   HierarchyKind kind) {
    Eigen::VectorXd v = basis.to_nodes(coeffs);
    const auto& mesh = basis.mesh();
    const int L = mesh.level;
    const int n = mesh.n_cells();

    for (int l = L; l >= 1; --l) {
        const int s = 1 << (L - l);
        for (int i = s; i < n; i += 2 * s) v[i] -= 0.5 * (v[i - s] + v[i + s]);
        if (kind == HierarchyKind::lifted) update_coarse(basis, v, s, +1.0);
    }

    HierarchicalCoeffs out;
    out.blocks.resize(L + 1);
    std::vector<double> level0;
    for (int i = 0; i <= n; i += 1 << L) {
        if (!is_essential(basis, i)) level0.push_back(v[i]);
    }
    out.blocks[0] = Eigen::Map<Eigen::VectorXd>(level0.data(), static_cast<Eigen::Index>(level0.size()));
    for (int l = 1; l <= L; ++l) {
        const int s = 1 << (L - l);
        Eigen::VectorXd block(mesh.base_cells << (l - 1));
        int k = 0;
        for (int i = s; i < n; i += 2 * s) block[k++] = v[i];
        out.blocks[l] = block;
    }
    return out;
}

Eigen::VectorXd to_nodal(const Basis1D& basis, const HierarchicalCoeffs& hier, HierarchyKind kind) {
    const auto& mesh = basis.mesh();
    const int L = mesh.level;
    const int n = mesh.n_cells();
    if (static_cast<int>(hier.blocks.size()) != L + 1) throw ValidationError("hier", "wrong number of level blocks");

    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
    int k = 0;
    for (int i = 0; i <= n; i += 1 << L) {
        if (is_essential(basis, i)) continue;
        if (k >= hier.blocks[0].size()) throw ValidationError("hier", "level-0 block too short");
        v[i] = hier.blocks[0][k++];
    }
    if (k != hier.blocks[0].size()) throw ValidationError("hier", "level-0 block has wrong length");
    for (int l = 1; l <= L; ++l) {
        const int s = 1 << (L - l);
        if (hier.blocks[l].size() != (mesh.base_cells << (l - 1))) {
            throw ValidationError("hier", "level " + std::to_string(l) + " block has wrong length");
        }
        int m = 0;
        for (int i = s; i < n; i += 2 * s) v[i] = hier.blocks[l][m++];
    }
    for (int l = 1; l <= L; ++l) {
        const int s = 1 << (L - l);
        if (kind == HierarchyKind::lifted) update_coarse(basis, v, s, -1.0);
        for (int i = s; i < n; i += 2 * s) v[i] += 0.5 * (v[i - s] + v[i + s]);
    }
    return basis.from_nodes(v);
}

Eigen::VectorXd prolongate(const Basis1D& coarse, const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
    const Eigen::VectorXd vc = coarse.to_nodes(coeffs);
    const Basis1D fine = coarse.refined();
    const int n = fine.mesh().n_cells();
    Eigen::VectorXd vf(n + 1);
    for (int i = 0; i <= n; ++i) vf[i] = i % 2 == 0 ? vc[i / 2] : 0.5 * (vc[i / 2] + vc[i / 2 + 1]);
    return fine.from_nodes(vf);
}

Eigen::VectorXd restrict_nodal(const Basis1D& fine, const Eigen::Ref<const Eigen::VectorXd>& coeffs) {
    const Eigen::VectorXd vf = fine.to_nodes(coeffs);
    const Basis1D coarse = fine.coarsened();
    Eigen::VectorXd vc(coarse.mesh().n_nodes());
    for (int i = 0; i < vc.size(); ++i) vc[i] = vf[2 * i];
    return coarse.from_nodes(vc);
}

namespace {

void require_nonnegative_domain(const Basis1D& basis, double a) {
    if (a != 0.0 && basis.mesh().interval.lo < 0.0) {
        throw ValidationError("weight", "power weight x^a needs a mesh on [0, R]");
    }
}

}  // namespace

Eigen::MatrixXd weighted_mass_dense(const Basis1D& basis, double a) {
    require_nonnegative_domain(basis, a);
    const auto& mesh = basis.mesh();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.size(), basis.size());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell cell = mesh.cell(c);
        for (int p = 0; p < 2; ++p) {
            const int i = basis.dof_of_node(c + p);
            if (i < 0) continue;
            for (int q = 0; q < 2; ++q) {
                const int j = basis.dof_of_node(c + q);
                if (j < 0) continue;
                M(i, j) += weighted_moment(cell, {p, false}, {q, false}, a);
            }
        }
    }
    return M;
}

Eigen::VectorXd weighted_load(const std::function<double(double)>& f, const Basis1D& basis, double a, int order) {
    require_nonnegative_domain(basis, a);
    const auto& mesh = basis.mesh();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(basis.size());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell cell = mesh.cell(c);
        for (int p = 0; p < 2; ++p) {
            const int i = basis.dof_of_node(c + p);
            if (i >= 0) b[i] += integrate_against_shape(f, cell, {p, false}, a, order);
        }
    }
    return b;
}

Eigen::VectorXd project(const std::function<double(double)>& f, const Basis1D& basis, double a) {
    const Eigen::MatrixXd M = weighted_mass_dense(basis, a);
    const Eigen::VectorXd b = weighted_load(f, basis, a);
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw NumericalError("weighted mass matrix is not positive definite");
    return llt.solve(b);
}

Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Basis1D& basis,
                         std::span<const double> points) {
    const Eigen::VectorXd v = basis.to_nodes(coeffs);
    const auto& mesh = basis.mesh();
    const double lo = mesh.interval.lo;
    const double hi = mesh.interval.hi;
    const double tol = 1e-12 * (hi - lo);
    Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
    for (std::size_t k = 0; k < points.size(); ++k) {
        const double x = points[k];
        if (!(x >= lo - tol && x <= hi + tol)) {
            throw ValidationError("points", "evaluation point " + std::to_string(x) + " outside the mesh interval");
        }
        const double s = (x - lo) / mesh.h();
        int c = static_cast<int>(std::floor(s));
        c = std::clamp(c, 0, mesh.n_cells() - 1);
        const double t = std::clamp(s - c, 0.0, 1.0);
        out[static_cast<Eigen::Index>(k)] = (1.0 - t) * v[c] + t * v[c + 1];
    }
    return out;
}

ProjectionError projection_error(const std::function<double(double)>& f, const std::function<double(double)>& df,
                                 const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Basis1D& basis,
                                 double a_value, double a_derivative, int order) {
    const Eigen::VectorXd v = basis.to_nodes(coeffs);
    const auto& mesh = basis.mesh();
    double e0 = 0.0;
    double e1 = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell cell = mesh.cell(c);
        const double h = cell.width();
        const double slope = (v[c + 1] - v[c]) / h;
        auto uh = [&](double x) { return v[c] + slope * (x - cell.x0); };
        e0 += integrate_weighted([&](double x) { const double d = f(x) - uh(x); return d * d; }, cell, a_value, order);
        if (df) {
            e1 += integrate_weighted([&](double x) { const double d = df(x) - slope; return d * d; }, cell,
                                     a_derivative, order);
        }
    }
    return {std::sqrt(e0), std::sqrt(e1)};
}

}  // namespace sabrfem
