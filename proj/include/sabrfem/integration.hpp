#pragma once

// Exact cell integrals of weighted products of piecewise-linear hat pieces,
// and Gauss rules for integrating sampled functions against them.

#include <functional>
#include <vector>

namespace sabrfem {

/// Local shape on a cell [x0, x1]: hat piece 0 falls from 1 to 0, piece 1
/// rises from 0 to 1. `derivative` selects the (constant) slope instead.
struct LocalShape {
    int index = 0;
    bool derivative = false;
};

struct Cell {
    double x0 = 0.0;
    double x1 = 0.0;

    double width() const noexcept { return x1 - x0; }
};

/// int_cell x^a * b_p(x) * b_q(x) dx, evaluated in closed form (monomial
/// antiderivatives near the origin, a convergent binomial series elsewhere).
/// Throws SingularIntegralError when the cell touches 0 and the combined
/// exponent of weight and polynomial vanishing is <= -1.
double weighted_moment(const Cell& cell, LocalShape p, LocalShape q, double a);

/// int_cell e^{c y} * b_p(y) * b_q(y) dy in closed form.
double exp_moment(const Cell& cell, LocalShape p, LocalShape q, double c);

/// Gauss rule on [0, 1] for the weight t^a (a > -1); a = 0 gives Gauss-Legendre.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule gauss_jacobi_unit(int n, double a);
const GaussRule& gauss_legendre_unit(int n);

/// int_cell f(x) x^a b_p(x) dx by an n-point rule; on a cell starting at 0
/// the monomial weight is absorbed exactly into a Gauss-Jacobi rule.
double integrate_against_shape(const std::function<double(double)>& f, const Cell& cell, LocalShape p,
                               double a, int n = 8);

/// int_cell g(x) x^a dx with the same singular-weight treatment.
double integrate_weighted(const std::function<double(double)>& g, const Cell& cell, double a, int n = 8);

}  // namespace sabrfem
