#include <doctest.h>

#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "sabrfem/errors.hpp"
#include "sabrfem/oracles.hpp"
#include "support.hpp"

using namespace sabrfem;
using testsupport::ts_integrate;

namespace {

double Phi(double z) { return boost::math::cdf(boost::math::normal(), z); }

/// Transition density of the CEV process absorbed at 0, for x > 0.
double cev_density(double x, double sigma, double beta, double x0, double T) {
    if (x <= 0.0) return 0.0;
    const double b = 1.0 - beta;
    const double c = b * b * sigma * sigma * T;
    const double z = std::pow(x * x0, b) / c;
    const double scaled = boost::math::cyl_bessel_i(1.0 / (2.0 * b), z) * std::exp(-z);
    const double d = std::pow(x, b) - std::pow(x0, b);
    return std::pow(x, 0.5 - 2.0 * beta) * std::sqrt(x0) / (b * sigma * sigma * T) * std::exp(-d * d / (2.0 * c)) *
           scaled;
}

struct DensityOracle {
    double absorbed;
    double put;
};

DensityOracle cev_by_density(double sigma, double beta, double x0, double K, double T) {
    auto p = [&](double x) { return cev_density(x, sigma, beta, x0, T); };
    const double b = 1.0 - beta;
    const double top = std::pow(std::pow(x0, b) + 12.0 * b * sigma * std::sqrt(T), 1.0 / b);
    const double split = std::min(x0, top);
    const double alive = ts_integrate(p, 0.0, split) + ts_integrate(p, split, top);
    const double kpart = ts_integrate([&](double x) { return (K - x) * p(x); }, 0.0, K);
    return {1.0 - alive, K * (1.0 - alive) + kpart};
}

}  // namespace

TEST_CASE("Black-Scholes closed form") {
    const double sigma = 0.2, x0 = 1.0, K = 1.1, T = 2.0;
    const double s = sigma * std::sqrt(T);
    const double d1 = (std::log(x0 / K) + 0.5 * s * s) / s;
    const double call = x0 * Phi(d1) - K * Phi(d1 - s);
    CHECK(black_scholes_price(sigma, x0, K, T, OptionType::call) == doctest::Approx(call).epsilon(1e-13));
    CHECK(black_scholes_price(sigma, x0, K, T, OptionType::call) -
              black_scholes_price(sigma, x0, K, T, OptionType::put) ==
          doctest::Approx(x0 - K).epsilon(1e-13));
    CHECK(black_scholes_price(0.2, 1.0, 1.0, 1.0, OptionType::put) == doctest::Approx(0.0796557).epsilon(1e-6));
}

TEST_CASE("noncentral chi-squared distribution function") {
    for (double k : {0.5, 2.0, 3.0, 4.0, 10.0}) {
        for (double lambda : {0.0, 0.3, 5.0, 44.4, 200.0}) {
            const boost::math::non_central_chi_squared d(k, lambda);
            for (double x : {0.01, 1.0, 5.0, 40.0, 50.0, 250.0}) {
                CAPTURE(k);
                CAPTURE(lambda);
                CAPTURE(x);
                CHECK(noncentral_chi2_cdf(x, k, lambda) ==
                      doctest::Approx(boost::math::cdf(d, x)).epsilon(1e-10).scale(1.0));
            }
        }
    }
    CHECK(noncentral_chi2_cdf(0.0, 3.0, 1.0) == 0.0);
}

TEST_CASE("CEV exact price against the transition density") {
    for (auto [sigma, beta] : {std::pair{0.3, 0.5}, std::pair{0.6, 0.3}, std::pair{0.5, 0.8}, std::pair{0.4, 0.2}}) {
        for (double K : {0.7, 1.0, 1.3}) {
            CAPTURE(sigma);
            CAPTURE(beta);
            CAPTURE(K);
            const auto ref = cev_by_density(sigma, beta, 1.0, K, 1.0);
            const double put = cev_exact_price(sigma, beta, 1.0, K, 1.0, OptionType::put);
            const double call = cev_exact_price(sigma, beta, 1.0, K, 1.0, OptionType::call);
            CHECK(put == doctest::Approx(ref.put).epsilon(1e-9));
            CHECK(call - put == doctest::Approx(1.0 - K).epsilon(1e-12).scale(1.0));
            CHECK(put >= std::max(K - 1.0, 0.0));
        }
        const auto ref = cev_by_density(sigma, beta, 1.0, 1.0, 1.0);
        CHECK(cev_absorption_probability(sigma, beta, 1.0, 1.0) == doctest::Approx(ref.absorbed).epsilon(1e-9).scale(1.0));
    }
    CHECK(cev_exact_price(0.3, 0.5, 1.0, 1.0, 1.0, OptionType::put) == doctest::Approx(0.1193446360).epsilon(1e-9));
}

TEST_CASE("CEV limits: beta = 1 and absorbed Gaussian beta = 0") {
    CHECK(cev_exact_price(0.2, 1.0, 1.0, 1.0, 1.0, OptionType::put) ==
          doctest::Approx(black_scholes_price(0.2, 1.0, 1.0, 1.0, OptionType::put)));
    const double sigma = 0.5, x0 = 1.0, T = 1.0, K = 0.9, s = sigma * std::sqrt(T);
    const boost::math::normal n(0.0, s);
    auto dens = [&](double x) { return boost::math::pdf(n, x - x0) - boost::math::pdf(n, x + x0); };
    const double mass0 = 2.0 * Phi(-x0 / s);
    const double put = K * mass0 + ts_integrate([&](double x) { return (K - x) * dens(x); }, 0.0, K);
    CHECK(cev_exact_price(sigma, 0.0, x0, K, T, OptionType::put) == doctest::Approx(put).epsilon(1e-10));
}

TEST_CASE("Monte Carlo: determinism across threads and agreement with exact prices") {
    const SabrParams cev{0.5, 0.0, 0.0, 1.0, 0.3};
    McConfig cfg;
    cfg.n_paths = 20000;
    cfg.n_steps = 200;
    cfg.seed = 42;
    cfg.threads = 1;
    const auto put = [](double x) { return std::max(1.0 - x, 0.0); };
    const auto a = mc_price(cev, put, 1.0, cfg);
    cfg.threads = 3;
    const auto b = mc_price(cev, put, 1.0, cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.n_paths == 20000);
    const double exact = cev_exact_price(0.3, 0.5, 1.0, 1.0, 1.0, OptionType::put);
    CHECK(std::abs(a.mean - exact) < 4.0 * a.stderr_);

    const SabrParams bs{1.0, 0.0, 0.0, 1.0, 0.2};
    const auto c = mc_price(bs, put, 1.0, cfg);
    CHECK(std::abs(c.mean - black_scholes_price(0.2, 1.0, 1.0, 1.0, OptionType::put)) < 4.0 * c.stderr_);
    CHECK(c.absorbed_fraction == 0.0);

    cfg.seed = 43;
    CHECK(mc_price(cev, put, 1.0, cfg).mean != a.mean);
}

TEST_CASE("Monte Carlo absorption frequency and barrier") {
    const SabrParams p{0.3, 0.0, 0.0, 1.0, 0.6};
    McConfig cfg;
    cfg.n_paths = 20000;
    cfg.n_steps = 400;
    const auto r = mc_price(p, [](double x) { return x <= 0.0 ? 1.0 : 0.0; }, 1.0, cfg);
    CHECK(r.mean == doctest::Approx(r.absorbed_fraction));
    const double exact = cev_absorption_probability(0.6, 0.3, 1.0, 1.0);
    // Discrete monitoring misses some crossings; allow for that bias.
    CHECK(std::abs(r.mean - exact) < 4.0 * r.stderr_ + 0.005);

    McConfig ko = cfg;
    ko.barrier = 1.2;
    const auto call = [](double x) { return std::max(x - 1.0, 0.0); };
    const auto up = mc_price({0.5, -0.3, 1.0, 1.0, 0.2}, call, 1.0, ko);
    const auto vanilla = mc_price({0.5, -0.3, 1.0, 1.0, 0.2}, call, 1.0, cfg);
    CHECK(up.mean < vanilla.mean);
    CHECK(up.knocked_out_fraction > 0.0);
}

TEST_CASE("Monte Carlo martingale") {
    McConfig cfg;
    cfg.n_paths = 20000;
    cfg.n_steps = 200;
    const auto r = mc_price({0.5, -0.3, 1.0, 1.0, 0.2}, [](double x) { return x; }, 1.0, cfg);
    CHECK(std::abs(r.mean - 1.0) < 4.0 * r.stderr_);
}

TEST_CASE("oracle argument validation") {
    CHECK_THROWS_AS(black_scholes_price(-0.2, 1.0, 1.0, 1.0, OptionType::put), ValidationError);
    CHECK_THROWS_AS(cev_exact_price(0.2, 1.5, 1.0, 1.0, 1.0, OptionType::put), ValidationError);
    McConfig bad;
    bad.n_paths = 0;
    CHECK_THROWS_AS(mc_price({0.5, 0.0, 0.0, 1.0, 0.2}, [](double) { return 0.0; }, 1.0, bad), ValidationError);
}
