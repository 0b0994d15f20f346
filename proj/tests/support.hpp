#pragma once

// Independent reference tools for the tests: adaptive quadrature from Boost,
// hat functions written out by hand, brute-force 2D assembly.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testsupport {

/// Integral over [a, b] by tanh-sinh (robust to endpoint singularities).
inline double ts_integrate(const std::function<double(double)>& f, double a, double b) {
    static boost::math::quadrature::tanh_sinh<double> rule;
    return rule.integrate([&f](double x) { return f(x); }, a, b);
}

/// 30-point Gauss-Legendre on [a, b] (smooth integrands).
inline double gl_integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 30>::integrate(f, a, b);
}

inline std::vector<double> uniform_nodes(double a, double b, int cells) {
    std::vector<double> n(cells + 1);
    for (int i = 0; i <= cells; ++i) n[i] = a + i * (b - a) / cells;
    return n;
}

/// Hat function of node k on the node list, and its derivative, at x.
inline double hat(const std::vector<double>& nodes, int k, double x) {
    const int n = static_cast<int>(nodes.size());
    if (k > 0 && x >= nodes[k - 1] && x <= nodes[k]) return (x - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
    if (k < n - 1 && x >= nodes[k] && x <= nodes[k + 1]) return (nodes[k + 1] - x) / (nodes[k + 1] - nodes[k]);
    return 0.0;
}

/// Derivative on the open cell containing x (x must not be a node).
inline double dhat(const std::vector<double>& nodes, int k, double x) {
    const int n = static_cast<int>(nodes.size());
    if (k > 0 && x > nodes[k - 1] && x < nodes[k]) return 1.0 / (nodes[k] - nodes[k - 1]);
    if (k < n - 1 && x > nodes[k] && x < nodes[k + 1]) return -1.0 / (nodes[k + 1] - nodes[k]);
    return 0.0;
}

/// Nodal interpolant with coefficients c on the node list, value and slope.
inline double interp(const std::vector<double>& nodes, const Eigen::VectorXd& c, double x) {
    double s = 0.0;
    for (int k = 0; k < static_cast<int>(nodes.size()); ++k) s += c[k] * hat(nodes, k, x);
    return s;
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = d(gen);
    return v;
}

/// 1D pieces of a tensor-product integrand: the weight and whether the
/// trial/test factor is differentiated.
struct Factor1D {
    std::function<double(double)> weight;
    bool trial_derivative = false;
    bool test_derivative = false;
};

/// Dense matrix of coeff * int int wx wy D(phi_j) D(phi_i) over all nodes of
/// both node lists (x-major numbering), integrated cell by cell with nested
/// tanh-sinh in x and Gauss-Legendre in y.
inline Eigen::MatrixXd brute_force_term(double coeff, const Factor1D& fx, const Factor1D& fy,
                                        const std::vector<double>& xn, const std::vector<double>& yn) {
    const int nx = static_cast<int>(xn.size());
    const int ny = static_cast<int>(yn.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nx * ny, nx * ny);
    auto shape = [](const std::vector<double>& n, int k, double t, bool d) { return d ? dhat(n, k, t) : hat(n, k, t); };
    for (int cx = 0; cx + 1 < nx; ++cx) {
        for (int cy = 0; cy + 1 < ny; ++cy) {
            for (int ix : {cx, cx + 1}) {
                for (int iy : {cy, cy + 1}) {
                    for (int jx : {cx, cx + 1}) {
                        for (int jy : {cy, cy + 1}) {
                            auto inner = [&](double x) {
                                const double px = fx.weight(x) * shape(xn, jx, x, fx.trial_derivative) *
                                                  shape(xn, ix, x, fx.test_derivative);
                                if (px == 0.0) return 0.0;
                                return px * gl_integrate(
                                                [&](double y) {
                                                    return fy.weight(y) * shape(yn, jy, y, fy.trial_derivative) *
                                                           shape(yn, iy, y, fy.test_derivative);
                                                },
                                                yn[cy], yn[cy + 1]);
                            };
                            out(ix * ny + iy, jx * ny + jy) += coeff * ts_integrate(inner, xn[cx], xn[cx + 1]);
                        }
                    }
                }
            }
        }
    }
    return out;
}

inline double sym_eig_min(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double spectral_norm_sym(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace testsupport
