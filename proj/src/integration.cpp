#include "sabrfem/integration.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

#include "sabrfem/errors.hpp"

namespace sabrfem {

namespace {

using Poly = std::array<double, 3>;  // coefficients of 1, t, t^2 in the local variable

Poly shape_poly(LocalShape s, double h) {
    if (s.derivative) return {s.index == 0 ? -1.0 / h : 1.0 / h, 0.0, 0.0};
    return s.index == 0 ? Poly{1.0, -1.0, 0.0} : Poly{0.0, 1.0, 0.0};
}

Poly product(const Poly& p, const Poly& q) {
    Poly r{0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; i + j < 3; ++j) r[i + j] += p[i] * q[j];
    return r;
}

// J_k = int_0^1 (x0 + h t)^a t^k dt
double power_local_moment(double x0, double h, double a, int k) {
    if (x0 == 0.0) return std::pow(h, a) / (a + k + 1.0);

    if (x0 < 2.0 * h) {
        // Monomial antiderivatives of x^{a+j}, recombined into powers of t.
        const double x1 = x0 + h;
        double sum = 0.0;
        double binom = 1.0;
        for (int j = 0; j <= k; ++j) {
            if (j > 0) binom = binom * (k - j + 1) / j;
            const double e = a + j + 1.0;
            const double pj = std::abs(e) < 1e-14 ? std::log(x1 / x0) : (std::pow(x1, e) - std::pow(x0, e)) / e;
            sum += binom * std::pow(-x0, k - j) * pj;
        }
        return sum / std::pow(h, k + 1);
    }

    // (x0 + h t)^a = x0^a sum_n binom(a, n) (h t / x0)^n with h / x0 <= 1/2.
    const double r = h / x0;
    double coeff = 1.0;
    double rn = 1.0;
    double sum = 0.0;
    for (int n = 0; n < 200; ++n) {
        const double term = coeff * rn / (n + k + 1.0);
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
        coeff *= (a - n) / (n + 1.0);
        if (coeff == 0.0) break;
        rn *= r;
    }
    return std::pow(x0, a) * sum;
}

// E_k = int_0^1 t^k e^{alpha t} dt
double exp_local_moment(double alpha, int k) {
    if (std::abs(alpha) < 1.0) {
        double term = 1.0;  // alpha^n / n!
        double sum = 0.0;
        for (int n = 0; n < 60; ++n) {
            const double add = term / (n + k + 1.0);
            sum += add;
            if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
            term *= alpha / (n + 1.0);
        }
        return sum;
    }
    const double ea = std::exp(alpha);
    double e = std::expm1(alpha) / alpha;
    for (int j = 1; j <= k; ++j) e = (ea - j * e) / alpha;
    return e;
}

GaussRule golub_welsch_jacobi(int n, double alpha, double beta) {
    // Monic Jacobi recurrence on [-1, 1] with weight (1-s)^alpha (1+s)^beta.
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    const double ab = alpha + beta;
    for (int i = 0; i < n; ++i) {
        const double d = 2.0 * i + ab;
        J(i, i) = i == 0 ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / (d * (d + 2.0));
    }
    for (int i = 1; i < n; ++i) {
        const double d = 2.0 * i + ab;
        double b;
        if (i == 1) {
            b = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
        } else {
            b = 4.0 * i * (i + alpha) * (i + beta) * (i + ab) / (d * d * (d + 1.0) * (d - 1.0));
        }
        J(i, i - 1) = J(i - 1, i) = std::sqrt(b);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                                std::lgamma(ab + 2.0));
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v0 = es.eigenvectors()(0, i);
        rule.nodes[i] = es.eigenvalues()(i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

double weighted_moment(const Cell& cell, LocalShape p, LocalShape q, double a) {
    const double h = cell.width();
    const Poly poly = product(shape_poly(p, h), shape_poly(q, h));
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (poly[k] == 0.0) continue;
        if (cell.x0 == 0.0 && a + k + 1.0 <= 0.0) {
            throw SingularIntegralError("weighted moment diverges at x = 0: weight exponent " + std::to_string(a) +
                                        " with vanishing order " + std::to_string(k));
        }
        sum += poly[k] * power_local_moment(cell.x0, h, a, k);
    }
    return h * sum;
}

double exp_moment(const Cell& cell, LocalShape p, LocalShape q, double c) {
    const double h = cell.width();
    const Poly poly = product(shape_poly(p, h), shape_poly(q, h));
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        if (poly[k] != 0.0) sum += poly[k] * exp_local_moment(c * h, k);
    }
    return h * std::exp(c * cell.x0) * sum;
}

GaussRule gauss_jacobi_unit(int n, double a) {
    if (n < 1) throw ValidationError("n", "quadrature order must be >= 1");
    if (!(a > -1.0)) throw SingularIntegralError("Gauss-Jacobi weight t^a requires a > -1");
    GaussRule s = golub_welsch_jacobi(n, 0.0, a);
    const double scale = std::pow(2.0, -a - 1.0);
    for (int i = 0; i < n; ++i) {
        s.nodes[i] = 0.5 * (s.nodes[i] + 1.0);
        s.weights[i] *= scale;
    }
    return s;
}

const GaussRule& gauss_legendre_unit(int n) {
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, gauss_jacobi_unit(n, 0.0)).first;
    return it->second;
}

double integrate_weighted(const std::function<double(double)>& g, const Cell& cell, double a, int n) {
    const double h = cell.width();
    double sum = 0.0;
    if (cell.x0 == 0.0 && a != 0.0) {
        const GaussRule rule = gauss_jacobi_unit(n, a);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * g(h * rule.nodes[i]);
        return std::pow(h, a + 1.0) * sum;
    }
    const GaussRule& rule = gauss_legendre_unit(n);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = cell.x0 + h * rule.nodes[i];
        sum += rule.weights[i] * g(x) * (a == 0.0 ? 1.0 : std::pow(x, a));
    }
    return h * sum;
}

double integrate_against_shape(const std::function<double(double)>& f, const Cell& cell, LocalShape p, double a,
                               int n) {
    const double h = cell.width();
    auto shape = [&](double x) {
        if (p.derivative) return p.index == 0 ? -1.0 / h : 1.0 / h;
        const double t = (x - cell.x0) / h;
        return p.index == 0 ? 1.0 - t : t;
    };
    return integrate_weighted([&](double x) { return f(x) * shape(x); }, cell, a, n);
}

}  // namespace sabrfem
