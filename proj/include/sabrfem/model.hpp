#pragma once

// SABR model parameters and the analytic constants of the weighted
// variational formulation.
//
//   dX = Y X^beta dW,  dY = nu Y dZ,  d<W,Z> = rho dt,  X absorbed at 0.
//
// In log-volatility y = ln Y the pricing operator is degenerate at x = 0;
// the weight x^mu on the pivot space compensates for that degeneracy.

#include <string>
#include <vector>

namespace sabrfem {

struct SabrParams {
    double beta = 0.5;
    double rho = 0.0;
    double nu = 0.0;
    double x0 = 1.0;
    double y0 = 0.2;

    bool is_cev() const noexcept { return nu == 0.0; }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

/// Admissible interval for the spatial weight exponent and its default.
struct MuRange {
    Interval interval;
    double default_mu = 0.0;
};

struct WellPosednessCert {
    double delta = 0.0;
    double epsilon = 0.0;
    double C1 = 0.0;  ///< continuity
    double C2 = 0.0;  ///< coercivity part of the Garding inequality
    double C3 = 0.0;  ///< Garding shift
    double mu = 0.0;  ///< weight exponent the constants were computed for
    std::vector<std::string> warnings;
};

/// Coefficients of the six Kronecker terms of the stiffness matrix.
struct CoefficientSet {
    double Qxx = 0.0;
    double Qxy = 0.0;
    double Qyy = 0.0;
    double cx1 = 0.0;
    double cx2 = 0.0;
    double cy = 0.0;
};

/// Result of validate_params: accepted, or the first failed bound.
struct Validation {
    bool accepted = true;
    std::string field;
    std::string reason;

    explicit operator bool() const noexcept { return accepted; }
};

/// Checks field ranges (throws ValidationError naming the field) and then
/// the well-posedness condition |rho| nu^2 < 2 (reported, not thrown).
Validation validate_params(const SabrParams& p);

/// Throws ValidationError unless validate_params accepts.
void require_valid(const SabrParams& p);

MuRange mu_range(double beta);

/// Resolves mu: NaN means "auto" (the default of mu_range). Throws if the
/// value lies outside the admissible interval.
double resolve_mu(double beta, double mu);

/// True iff the delta interval (|rho| nu^3 / 2, 2 / (|rho| nu)) is nonempty,
/// or rho nu = 0.
bool delta_interval_nonempty(double rho, double nu);

WellPosednessCert wellposedness_constants(const SabrParams& p, double mu);

CoefficientSet operator_coefficients(const SabrParams& p, double mu);

}  // namespace sabrfem
