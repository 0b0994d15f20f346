#pragma once

// Weighted 1D building blocks and the Kronecker-assembled bivariate mass,
// stiffness and V-norm Gram operators.
//
// Global numbering is x-major: index = ix * n_y + iy. Operators act on the
// active (non-essential) nodes; the couplings active x all nodes carry the
// columns needed to lift prescribed boundary values.

#include <Eigen/SparseCore>
#include <optional>
#include <string>
#include <vector>

#include "sabrfem/model.hpp"
#include "sabrfem/multiresolution.hpp"

namespace sabrfem {

using SpMat = Eigen::SparseMatrix<double>;

/// M: int w phi_j phi_i. S: int w phi_j' phi_i'. B: int w phi_j' phi_i
/// (trial derivative). BT: int w phi_j phi_i' (test derivative).
enum class BlockKind { M, S, B, BT };

struct WeightSpec {
    enum class Family { power, exponential };
    Family family = Family::power;
    double param = 0.0;  ///< exponent a of x^a, or rate c of e^{c y}

    static WeightSpec power(double a) { return {Family::power, a}; }
    static WeightSpec exponential(double c) { return {Family::exponential, c}; }
    static WeightSpec unit() { return power(0.0); }
};

/// One coordinate direction: a mesh with boundary flags, or a single point
/// (frozen coordinate, used for the y direction when nu = 0).
class Axis {
public:
    static Axis mesh(Basis1D basis);
    static Axis point(double coordinate);

    bool is_point() const noexcept { return !basis_.has_value(); }
    const Basis1D& basis() const;
    double point_coordinate() const noexcept { return point_; }

    int n_all() const noexcept;
    int n_active() const noexcept;
    /// Node index (into all nodes) of each active node.
    const std::vector<int>& active_nodes() const noexcept { return active_; }
    std::vector<double> coordinates() const;

private:
    std::optional<Basis1D> basis_;
    double point_ = 0.0;
    std::vector<int> active_;
};

/// Rectangular block: rows are active test functions, columns all trial nodes.
SpMat assemble_1d_rect(BlockKind kind, WeightSpec weight, const Axis& axis);

/// Square block over the active nodes (rows and columns).
SpMat assemble_1d(BlockKind kind, WeightSpec weight, const Axis& axis);

struct KroneckerTerm {
    std::string label;
    double coeff = 0.0;
    BlockKind kind_x = BlockKind::M;
    WeightSpec weight_x;
    BlockKind kind_y = BlockKind::M;
    WeightSpec weight_y;
};

/// Kronecker terms of M, A and G for the given model and weight exponent.
std::vector<KroneckerTerm> mass_terms(double mu);
std::vector<KroneckerTerm> stiffness_terms(const SabrParams& p, double mu);
std::vector<KroneckerTerm> vnorm_terms(const SabrParams& p, double mu);

/// Sum of coeff * kron(X-block, Y-block), active rows x all columns.
SpMat assemble_terms_rect(const std::vector<KroneckerTerm>& terms, const Axis& x, const Axis& y);

struct TensorOperator {
    Axis x;
    Axis y;
    SpMat mass;        ///< active x active
    SpMat stiffness;   ///< active x active
    SpMat vnorm_gram;  ///< active x active
    SpMat mass_coupling;       ///< active x all
    SpMat stiffness_coupling;  ///< active x all
    std::vector<KroneckerTerm> mass_factors;
    std::vector<KroneckerTerm> stiffness_factors;
    std::vector<KroneckerTerm> gram_factors;
    std::vector<int> active_to_full;  ///< full x-major index of each active dof

    int n_active() const noexcept { return static_cast<int>(active_to_full.size()); }
    int n_all() const noexcept { return x.n_all() * y.n_all(); }
    /// Restricts a full nodal vector to the active dofs.
    Eigen::VectorXd restrict_full(const Eigen::Ref<const Eigen::VectorXd>& full) const;
    /// Scatters active coefficients into a full vector (other entries taken from `boundary`).
    Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& active,
                           const Eigen::Ref<const Eigen::VectorXd>& boundary) const;
};

/// Assembles M, A, G and the lifting couplings. `p` must be accepted by
/// validate_params; mu must be admissible for p.beta.
TensorOperator assemble_operator(const SabrParams& p, double mu, const Axis& x, const Axis& y);

SpMat assemble_mass(double mu, const Axis& x, const Axis& y);
SpMat assemble_stiffness(const SabrParams& p, double mu, const Axis& x, const Axis& y);
SpMat assemble_vnorm_gram(const SabrParams& p, double mu, const Axis& x, const Axis& y);

/// Columns of `rect` (active x all) restricted to the active nodes.
SpMat active_columns(const SpMat& rect, const Axis& x, const Axis& y);

/// Matrix Market coordinate dump (debugging aid). Throws IoError.
void write_matrix_market(const SpMat& m, const std::string& path);

}  // namespace sabrfem
