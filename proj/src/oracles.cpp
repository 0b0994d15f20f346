#include "sabrfem/oracles.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "sabrfem/errors.hpp"

namespace sabrfem {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct ChunkStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t absorbed = 0;
    std::int64_t knocked = 0;
};

constexpr std::int64_t kChunk = 2048;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

void check_positive(const char* field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be > 0");
}

}  // namespace

McResult mc_price(const SabrParams& p, const std::function<double(double)>& payoff, double T, const McConfig& cfg) {
    require_valid(p);
    check_positive("T", T);
    if (cfg.n_paths < 1) throw ValidationError("n_paths", "must be >= 1");
    if (cfg.n_steps < 1) throw ValidationError("n_steps", "must be >= 1");
    if (!payoff) throw ValidationError("payoff", "missing payoff function");

    const double dt = T / cfg.n_steps;
    const double sq = std::sqrt(dt);
    const double rho = p.rho;
    const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const double drift = -0.5 * p.nu * p.nu * dt;
    const double beta = p.beta;
    auto power = [beta](double x) {
        if (beta == 0.5) return std::sqrt(x);
        if (beta == 1.0) return x;
        if (beta == 0.0) return 1.0;
        return std::pow(x, beta);
    };

    const std::int64_t n_chunks = (cfg.n_paths + kChunk - 1) / kChunk;
    std::vector<ChunkStats> stats(static_cast<std::size_t>(n_chunks));

    auto run_chunk = [&](std::int64_t c) {
        ChunkStats s;
        const std::int64_t first = c * kChunk;
        const std::int64_t last = std::min(cfg.n_paths, first + kChunk);
        for (std::int64_t path = first; path < last; ++path) {
            std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(path))));
            std::normal_distribution<double> normal;
            double x = p.x0;
            double ly = std::log(p.y0);
            bool absorbed = false;
            bool knocked = false;
            for (int n = 0; n < cfg.n_steps; ++n) {
                const double z1 = normal(rng);
                const double z2 = normal(rng);
                x += std::exp(ly) * power(x) * sq * z1;
                ly += p.nu * sq * (rho * z1 + rho_c * z2) + drift;
                if (x <= 0.0) {
                    x = 0.0;
                    absorbed = true;
                    break;
                }
                if (x >= cfg.barrier) {
                    knocked = true;
                    break;
                }
            }
            const double v = knocked ? 0.0 : payoff(x);
            s.sum += v;
            s.sum_sq += v * v;
            s.absorbed += absorbed ? 1 : 0;
            s.knocked += knocked ? 1 : 0;
        }
        stats[static_cast<std::size_t>(c)] = s;
    };

    int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp<int>(threads, 1, static_cast<int>(std::min<std::int64_t>(n_chunks, 64)));
    if (threads == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::int64_t c = t; c < n_chunks; c += threads) run_chunk(c);
            });
        }
        for (auto& th : pool) th.join();
    }

    ChunkStats total;
    for (const auto& s : stats) {
        total.sum += s.sum;
        total.sum_sq += s.sum_sq;
        total.absorbed += s.absorbed;
        total.knocked += s.knocked;
    }
    const double n = static_cast<double>(cfg.n_paths);
    McResult r;
    r.n_paths = cfg.n_paths;
    r.mean = total.sum / n;
    const double var = n > 1 ? std::max(0.0, (total.sum_sq - n * r.mean * r.mean) / (n - 1.0)) : 0.0;
    r.stderr_ = std::sqrt(var / n);
    r.absorbed_fraction = total.absorbed / n;
    r.knocked_out_fraction = total.knocked / n;
    return r;
}

double black_scholes_price(double sigma, double x0, double K, double T, OptionType type) {
    check_positive("sigma", sigma);
    check_positive("x0", x0);
    check_positive("K", K);
    check_positive("T", T);
    const double s = sigma * std::sqrt(T);
    const double d1 = (std::log(x0 / K) + 0.5 * s * s) / s;
    const double d2 = d1 - s;
    if (type == OptionType::call) return x0 * norm_cdf(d1) - K * norm_cdf(d2);
    return K * norm_cdf(-d2) - x0 * norm_cdf(-d1);
}

double noncentral_chi2_cdf(double x, double dof, double lambda) {
    if (!(dof > 0.0)) throw ValidationError("dof", "must be > 0");
    if (!(lambda >= 0.0)) throw ValidationError("noncentrality", "must be >= 0");
    if (x <= 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    constexpr double tol = 1e-12;
    constexpr long cap = 100000;

    const double half = 0.5 * lambda;
    const double hx = 0.5 * x;
    auto weight = [&](long j) {
        if (half == 0.0) return j == 0 ? 1.0 : 0.0;
        return std::exp(-half + j * std::log(half) - std::lgamma(j + 1.0));
    };
    auto term = [&](long j) { return weight(j) * boost::math::gamma_p(0.5 * dof + j, hx); };

    const long mode = static_cast<long>(std::floor(half));
    double sum = 0.0;
    long used = 0;
    for (long j = mode; used < cap; ++j, ++used) {
        const double w = weight(j);
        sum += term(j);
        // Beyond the mode the weights decay at least geometrically.
        if (j > half + 1.0 && w < tol * 1e-3 * (1.0 - half / (j + 1.0))) break;
    }
    for (long j = mode - 1; j >= 0 && used < cap; --j, ++used) {
        const double w = weight(j);
        sum += term(j);
        if (w < tol * 1e-3) break;
    }
    if (used >= cap) throw NumericalError("noncentral chi-squared series did not converge within 1e5 terms");
    return std::clamp(sum, 0.0, 1.0);
}

double cev_absorption_probability(double sigma, double beta, double x0, double T) {
    check_positive("sigma", sigma);
    check_positive("x0", x0);
    check_positive("T", T);
    if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("beta", "absorption probability needs beta in (0, 1)");
    const double b = 1.0 - beta;
    const double xs = std::pow(x0, 2.0 * b) / (sigma * sigma * b * b * T);
    return boost::math::gamma_q(1.0 / (2.0 * b), 0.5 * xs);
}

double cev_exact_price(double sigma, double beta, double x0, double K, double T, OptionType type) {
    check_positive("sigma", sigma);
    check_positive("x0", x0);
    check_positive("K", K);
    check_positive("T", T);
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta", "must lie in [0, 1]");
    if (beta == 1.0) return black_scholes_price(sigma, x0, K, T, type);

    double put;
    if (beta == 0.0) {
        // Arithmetic Brownian motion absorbed at 0 (method of images).
        const double s = sigma * std::sqrt(T);
        auto partial = [&](double m) {
            const double a = (K - m) / s;
            const double b = -m / s;
            return (K - m) * (norm_cdf(a) - norm_cdf(b)) + s * (norm_pdf(a) - norm_pdf(b));
        };
        put = 2.0 * K * norm_cdf(-x0 / s) + partial(x0) - partial(-x0);
    } else {
        const double b = 1.0 - beta;
        const double scale = sigma * sigma * b * b * T;
        const double xs = std::pow(x0, 2.0 * b) / scale;
        const double ys = std::pow(K, 2.0 * b) / scale;
        const double call = x0 * (1.0 - noncentral_chi2_cdf(ys, 2.0 + 1.0 / b, xs)) -
                            K * noncentral_chi2_cdf(xs, 1.0 / b, ys);
        put = call - x0 + K;
    }
    return type == OptionType::put ? put : put + x0 - K;
}

}  // namespace sabrfem
