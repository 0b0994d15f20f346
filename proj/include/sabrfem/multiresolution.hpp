#pragma once

// Dyadic mesh hierarchy, nodal hat basis and its multilevel (hierarchical)
// representation, weighted L2 projection and evaluation.

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

#include "sabrfem/integration.hpp"
#include "sabrfem/model.hpp"

namespace sabrfem {

/// Uniform mesh of C * 2^L cells on [a, b]; level l refines level l-1 by bisection.
struct DyadicMesh {
    Interval interval;
    int level = 0;
    int base_cells = 1;

    int n_cells() const noexcept { return base_cells << level; }
    int n_nodes() const noexcept { return n_cells() + 1; }
    double h() const noexcept { return (interval.hi - interval.lo) / n_cells(); }
    double node(int i) const noexcept { return interval.lo + i * (interval.hi - interval.lo) / n_cells(); }
    Cell cell(int i) const noexcept { return {node(i), node(i + 1)}; }
    std::vector<double> nodes() const;

    /// The same interval at a coarser level (level - levels_down >= 0).
    DyadicMesh coarsened(int levels_down = 1) const;
};

DyadicMesh build_mesh(Interval interval, int level, int base_cells = 1);

enum class Boundary { essential_zero, free };

/// Nodal hat functions on a mesh; essential nodes carry no degree of freedom.
class Basis1D {
public:
    Basis1D(DyadicMesh mesh, Boundary left, Boundary right);

    const DyadicMesh& mesh() const noexcept { return mesh_; }
    Boundary left() const noexcept { return left_; }
    Boundary right() const noexcept { return right_; }
    /// Node index of every degree of freedom, ascending.
    const std::vector<int>& dofs() const noexcept { return dofs_; }
    int size() const noexcept { return static_cast<int>(dofs_.size()); }
    /// Degree of freedom of a node, or -1 for an essential node.
    int dof_of_node(int node) const noexcept;

    /// Full nodal vector (zeros on essential nodes) from dof coefficients.
    Eigen::VectorXd to_nodes(const Eigen::Ref<const Eigen::VectorXd>& coeffs) const;
    Eigen::VectorXd from_nodes(const Eigen::Ref<const Eigen::VectorXd>& nodal) const;

    /// The same boundary flags on the mesh one level finer/coarser.
    Basis1D refined() const;
    Basis1D coarsened() const;

private:
    DyadicMesh mesh_;
    Boundary left_;
    Boundary right_;
    std::vector<int> dofs_;
};

/// Per-level blocks: block 0 holds the level-0 node values, block l >= 1 the
/// details of the C * 2^(l-1) nodes introduced at level l.
struct HierarchicalCoeffs {
    std::vector<Eigen::VectorXd> blocks;

    Eigen::VectorXd flatten() const;
};

/// interpolatory: detail = value minus the coarse interpolant (classical
/// hierarchical basis). lifted: additionally updates coarse values so each
/// detail function has a vanishing integral, giving an L2-stable splitting.
enum class HierarchyKind { interpolatory, lifted };

HierarchicalCoeffs to_hierarchical(const Basis1D& basis, const Eigen::Ref<const Eigen::VectorXd>& coeffs,
                                   HierarchyKind kind = HierarchyKind::interpolatory);
Eigen::VectorXd to_nodal(const Basis1D& basis, const HierarchicalCoeffs& hier,
                         HierarchyKind kind = HierarchyKind::interpolatory);

/// Coarse level-(l-1) coefficients to the level-l basis (exact embedding).
Eigen::VectorXd prolongate(const Basis1D& coarse, const Eigen::Ref<const Eigen::VectorXd>& coeffs);
/// Injection of level-l nodal values onto the level-(l-1) nodes.
Eigen::VectorXd restrict_nodal(const Basis1D& fine, const Eigen::Ref<const Eigen::VectorXd>& coeffs);

/// Weighted mass matrix int x^a phi_j phi_i over the basis dofs (a = 0 on
/// meshes that do not start at the origin is the plain mass matrix).
Eigen::MatrixXd weighted_mass_dense(const Basis1D& basis, double a);

/// b_i = int f phi_i x^a, cellwise Gauss rules of order 8.
Eigen::VectorXd weighted_load(const std::function<double(double)>& f, const Basis1D& basis, double a,
                              int order = 8);

/// Weighted L2 orthogonal projection onto span(basis).
Eigen::VectorXd project(const std::function<double(double)>& f, const Basis1D& basis, double a);

/// Piecewise-linear interpolation of dof coefficients at the given points.
Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Basis1D& basis,
                         std::span<const double> points);

/// Weighted norm of f - u_h over the mesh: sqrt(int (f - u_h)^2 x^a) and,
/// when df is given, the derivative part sqrt(int (f' - u_h')^2 x^b).
struct ProjectionError {
    double l2 = 0.0;
    double h1_seminorm = 0.0;
};

ProjectionError projection_error(const std::function<double(double)>& f, const std::function<double(double)>& df,
                                 const Eigen::Ref<const Eigen::VectorXd>& coeffs, const Basis1D& basis,
                                 double a_value, double a_derivative, int order = 16);

}  // namespace sabrfem
