#pragma once

// Reference prices independent of the finite element pipeline.

#include <cstdint>
#include <functional>
#include <limits>

#include "sabrfem/model.hpp"

namespace sabrfem {

enum class OptionType { call, put };

struct McConfig {
    std::int64_t n_paths = 100000;
    int n_steps = 1000;
    std::uint64_t seed = 20240601;
    int threads = 0;  ///< 0 = hardware concurrency; results do not depend on it
    /// Up-and-out level monitored at every step (infinity = none).
    double barrier = std::numeric_limits<double>::infinity();
};

struct McResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    double absorbed_fraction = 0.0;
    double knocked_out_fraction = 0.0;
    std::int64_t n_paths = 0;
};

/// Euler in X with permanent absorption at 0, exact lognormal volatility
/// Y_t = y0 exp(nu Z_t - nu^2 t / 2). Absorbed paths pay payoff(0).
/// Each path draws from its own generator seeded by (seed, path index).
McResult mc_price(const SabrParams& p, const std::function<double(double)>& payoff, double T, const McConfig& cfg);

double black_scholes_price(double sigma, double x0, double K, double T, OptionType type);

/// CEV dX = sigma X^beta dW absorbed at 0, zero rates. beta in (0, 1) uses
/// the noncentral chi-squared representation; beta = 1 is Black-Scholes and
/// beta = 0 the absorbed Gaussian.
double cev_exact_price(double sigma, double beta, double x0, double K, double T, OptionType type);

/// P(X_T = 0) for the absorbed CEV process, beta in (0, 1).
double cev_absorption_probability(double sigma, double beta, double x0, double T);

/// Noncentral chi-squared distribution function by a Poisson-weighted
/// central series, truncated when the remaining Poisson mass is below 1e-12
/// (at most 1e5 terms).
double noncentral_chi2_cdf(double x, double dof, double noncentrality);

}  // namespace sabrfem
