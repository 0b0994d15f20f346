#pragma once

// Pricing problems on the truncated domain [0, R_x] x [y_c - R_y, y_c + R_y]
// in (forward, log-volatility), solved in time-to-maturity.
//
// Boundary treatment (highest priority first): x = R_x knock-out zero;
// x = 0 absorbed value u0(0); lower y edge zero-volatility value u0(x);
// upper y edge zero. Prescribed values enter by lifting.

#include <Eigen/Core>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sabrfem/assembly.hpp"
#include "sabrfem/model.hpp"
#include "sabrfem/timestepper.hpp"

namespace sabrfem {

enum class OriginBC { absorbing, free };
enum class VolEdgeBC { intrinsic, zero };

struct DiscretizationSpec {
    static constexpr double kAuto = std::numeric_limits<double>::quiet_NaN();

    double R_x = kAuto;       ///< upper forward truncation
    double R_y = kAuto;       ///< log-vol half-width
    double y_center = kAuto;  ///< log-vol center, default ln y0
    int L_x = 6;
    int L_y = 6;
    int base_cells_x = 1;
    int base_cells_y = 1;
    double mu = kAuto;  ///< weight exponent, default -beta (0 for beta = 1)
    OriginBC origin = OriginBC::absorbing;
    VolEdgeBC lower_vol = VolEdgeBC::intrinsic;
    VolEdgeBC upper_vol = VolEdgeBC::intrinsic;
};

struct Payoff {
    enum class Kind { call, put, mass_zero_put, identity, custom };

    Kind kind = Kind::put;
    double strike = 1.0;  ///< K for call/put, epsilon for mass_zero_put
    std::function<double(double)> fn;

    static Payoff call(double K);
    static Payoff put(double K);
    static Payoff mass_zero_put(double eps);
    static Payoff identity();
    static Payoff custom(std::function<double(double)> f);

    double operator()(double x) const;
    /// Points where the payoff is not smooth (split quadrature there).
    std::vector<double> kinks() const;
    std::string describe() const;
};

/// Fills every automatic field. Throws ValidationError if (x0, ln y0) is not
/// strictly inside the domain.
DiscretizationSpec resolve_spec(const SabrParams& p, const Payoff& payoff, double T, DiscretizationSpec spec);

/// Axes of the resolved spec (a point y axis at ln y0 when nu = 0).
Axis build_x_axis(const DiscretizationSpec& spec);
Axis build_y_axis(const SabrParams& p, const DiscretizationSpec& spec);

/// Full nodal vector holding the prescribed boundary values (zeros on dofs).
Eigen::VectorXd boundary_values(const Payoff& payoff, const TensorOperator& op, const DiscretizationSpec& spec);

struct InitialData {
    Eigen::VectorXd active;    ///< projected dof coefficients
    Eigen::VectorXd boundary;  ///< full vector of lifted boundary values
    Eigen::VectorXd full;      ///< active scattered into boundary
    double projection_error = 0.0;  ///< ||u0 - u_h(0)||_H over the domain
    double best_error = 0.0;        ///< unconstrained best approximation error in V^L
    double boundary_mismatch = 0.0; ///< |u0(R_x)|, the clipping at the knock-out edge
};

/// Weighted L2 projection of the payoff (constant in y) with lifted boundary values.
InitialData project_payoff(const Payoff& payoff, const TensorOperator& op, const DiscretizationSpec& spec);

struct PriceSurface {
    SabrParams params;
    DiscretizationSpec spec;
    double T = 0.0;
    std::vector<double> x_nodes;
    std::vector<double> y_nodes;
    Eigen::VectorXd values;   ///< full nodal values at T, x-major
    Eigen::VectorXd initial;  ///< full nodal values at 0
    double projection_error = 0.0;
    double best_error = 0.0;
    std::vector<std::string> warnings;

    /// Bilinear interpolation; y is ignored on a point axis. Throws outside.
    double value_at(double x, double y) const;
    double point_price() const;
};

PriceSurface price_european(const SabrParams& p, const Payoff& payoff, const DiscretizationSpec& spec,
                            const ThetaConfig& config);

/// Up-and-out price: the same pipeline on [0, B] with zero at B. B is
/// snapped to the nearest x-node of the vanilla mesh (warning if moved).
PriceSurface price_barrier(const SabrParams& p, const Payoff& payoff, const DiscretizationSpec& spec,
                           const ThetaConfig& config, double barrier);

struct MassAtZeroResult {
    double estimate = 0.0;
    std::vector<double> eps;
    std::vector<double> values;
    std::vector<std::string> warnings;
};

/// Prices max(1 - x/eps, 0) for each eps; the smallest eps gives the estimate.
MassAtZeroResult mass_at_zero(const SabrParams& p, double T, const DiscretizationSpec& spec,
                              const ThetaConfig& config, const std::vector<double>& eps_sequence);

}  // namespace sabrfem
