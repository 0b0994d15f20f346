#pragma once

// Measured convergence rates: spatial (against a finer reference or a
// manufactured solution), temporal, and 1D projection rates.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sabrfem/model.hpp"
#include "sabrfem/pricing.hpp"
#include "sabrfem/timestepper.hpp"

namespace sabrfem {

struct ConvergenceReport {
    std::string description;
    std::string reference;
    std::string grid_kind = "level";  ///< "level" or "k"
    std::vector<double> grid;
    std::vector<double> error_h;
    std::vector<double> error_energy;
    double slope_h = std::numeric_limits<double>::quiet_NaN();
    double slope_energy = std::numeric_limits<double>::quiet_NaN();
    double nominal_h = std::numeric_limits<double>::quiet_NaN();
    double nominal_energy = std::numeric_limits<double>::quiet_NaN();
    bool monotone = true;  ///< errors decrease along the grid
    std::vector<std::string> warnings;
};

/// Least-squares slope of -log2(error) against level (or of log2(error)
/// against log2(k) when by_step), dropping the coarsest point when at least
/// four points are given. Zero errors are skipped; NaN if fewer than two remain.
double fit_rate(const std::vector<double>& grid, const std::vector<double>& errors, bool by_step = false);

/// Errors of the price surfaces at `levels` (both axes) against the
/// solution at max(levels) + 2, in the H-norm (weighted mass) and the
/// V-norm (Gram matrix G), both evaluated on the reference grid.
ConvergenceReport spatial_convergence_study(const SabrParams& p, const Payoff& payoff, const std::vector<int>& levels,
                                            const ThetaConfig& config, const DiscretizationSpec& base = {});

/// Manufactured solution u = exp(-t) x (R_x - x) (y - a)(b - y) with the
/// matching Galerkin forcing; errors against u(T) in the H-norm and V-norm.
ConvergenceReport manufactured_convergence_study(const SabrParams& p, const std::vector<int>& levels,
                                                 const ThetaConfig& config, const DiscretizationSpec& base = {});

/// Fixed grid, steps_sequence increasing. Reference: Richardson
/// extrapolation of two runs at 4x and 8x the largest step count.
ConvergenceReport temporal_convergence_study(const SabrParams& p, const Payoff& payoff,
                                             const DiscretizationSpec& spec, const std::vector<int>& steps_sequence,
                                             double theta, double T, int startup_steps = 0);

/// Weighted L2 projection of f onto hat functions on `interval` (free ends),
/// errors in L2(x^mu) and the weighted H1 norm.
ConvergenceReport projection_rate_study(double mu, const std::function<double(double)>& f,
                                        const std::function<double(double)>& df, const std::vector<int>& levels,
                                        Interval interval = {0.0, 1.0});

}  // namespace sabrfem
