#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sabrfem/assembly.hpp"
#include "sabrfem/errors.hpp"
#include "support.hpp"

using namespace sabrfem;
using namespace testsupport;

namespace {

Axis free_axis(double a, double b, int level) {
    return Axis::mesh(Basis1D(build_mesh({a, b}, level), Boundary::free, Boundary::free));
}

Axis dirichlet_axis(double a, double b, int level) {
    return Axis::mesh(Basis1D(build_mesh({a, b}, level), Boundary::essential_zero, Boundary::essential_zero));
}

std::function<double(double)> weight_fn(const WeightSpec& w) {
    if (w.family == WeightSpec::Family::power) {
        const double a = w.param;
        return [a](double x) { return a == 0.0 ? 1.0 : std::pow(x, a); };
    }
    const double c = w.param;
    return [c](double y) { return std::exp(c * y); };
}

Factor1D factor(BlockKind kind, const WeightSpec& w) {
    Factor1D f;
    f.weight = weight_fn(w);
    f.trial_derivative = kind == BlockKind::S || kind == BlockKind::B;
    f.test_derivative = kind == BlockKind::S || kind == BlockKind::BT;
    return f;
}

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

/// Bilinear form written out from its integral definition, evaluated for
/// nodal coefficient vectors on free tensor grids by nested quadrature.
double bilinear_form(const SabrParams& p, double mu, const std::vector<double>& xn, const std::vector<double>& yn,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const int ny = static_cast<int>(yn.size());
    const double b = p.beta, r = p.rho, nu = p.nu;
    double total = 0.0;
    for (std::size_t cx = 0; cx + 1 < xn.size(); ++cx) {
        for (std::size_t cy = 0; cy + 1 < yn.size(); ++cy) {
            auto eval = [&](const Eigen::VectorXd& c, double x, double y, double& val, double& dx, double& dy) {
                val = dx = dy = 0.0;
                for (int ix : {int(cx), int(cx) + 1}) {
                    for (int iy : {int(cy), int(cy) + 1}) {
                        const double coef = c[ix * ny + iy];
                        val += coef * hat(xn, ix, x) * hat(yn, iy, y);
                        dx += coef * dhat(xn, ix, x) * hat(yn, iy, y);
                        dy += coef * hat(xn, ix, x) * dhat(yn, iy, y);
                    }
                }
            };
            auto inner = [&](double x) {
                return gl_integrate(
                    [&](double y) {
                        double u0, ux, uy, v0, vx, vy;
                        eval(u, x, y, u0, ux, uy);
                        eval(v, x, y, v0, vx, vy);
                        const double e = std::exp(y);
                        double s = 0.5 * std::pow(x, 2 * b + mu) * e * e * ux * vx;
                        s += r * nu * std::pow(x, b + mu) * e * ux * vy;
                        s += 0.5 * nu * nu * std::pow(x, mu) * uy * vy;
                        s += 0.5 * (2 * b + mu) * std::pow(x, 2 * b + mu - 1) * e * e * ux * v0;
                        s += r * nu * std::pow(x, b + mu) * e * ux * v0;
                        s += 0.5 * nu * nu * std::pow(x, mu) * uy * v0;
                        return s;
                    },
                    yn[cy], yn[cy + 1]);
            };
            total += ts_integrate(inner, xn[cx], xn[cx + 1]);
        }
    }
    return total;
}

}  // namespace

TEST_CASE("1D stencils with unit weight") {
    const Axis ax = free_axis(0.0, 1.0, 4);
    const double h = 1.0 / 16;
    const Eigen::MatrixXd M(assemble_1d(BlockKind::M, WeightSpec::unit(), ax));
    const Eigen::MatrixXd S(assemble_1d(BlockKind::S, WeightSpec::unit(), ax));
    const Eigen::MatrixXd B(assemble_1d(BlockKind::B, WeightSpec::unit(), ax));
    const Eigen::MatrixXd BT(assemble_1d(BlockKind::BT, WeightSpec::unit(), ax));
    for (int i = 1; i < 16; ++i) {
        CHECK(M(i, i - 1) == doctest::Approx(h / 6));
        CHECK(M(i, i) == doctest::Approx(4 * h / 6));
        CHECK(M(i, i + 1) == doctest::Approx(h / 6));
        CHECK(S(i, i - 1) == doctest::Approx(-1 / h));
        CHECK(S(i, i) == doctest::Approx(2 / h));
        CHECK(B(i, i - 1) == doctest::Approx(-0.5));
        CHECK(B(i, i) == doctest::Approx(0.0));
        CHECK(B(i, i + 1) == doctest::Approx(0.5));
        // Derivatives of all trial functions sum to zero.
        CHECK(B.row(i).sum() == doctest::Approx(0.0));
    }
    CHECK((BT - B.transpose()).cwiseAbs().maxCoeff() < 1e-15);
    // Bandwidth one.
    for (int i = 0; i < M.rows(); ++i) {
        for (int j = 0; j < M.cols(); ++j) {
            if (std::abs(i - j) > 1) CHECK(M(i, j) == 0.0);
        }
    }
}

TEST_CASE("rectangular blocks and point axes") {
    const Axis ax = Axis::mesh(Basis1D(build_mesh({0.0, 2.0}, 3), Boundary::free, Boundary::essential_zero));
    CHECK(ax.n_all() == 9);
    CHECK(ax.n_active() == 8);
    const SpMat R = assemble_1d_rect(BlockKind::M, WeightSpec::power(-0.5), ax);
    CHECK(R.rows() == 8);
    CHECK(R.cols() == 9);
    const SpMat Q = assemble_1d(BlockKind::M, WeightSpec::power(-0.5), ax);
    CHECK(Q.rows() == 8);
    CHECK(Q.cols() == 8);
    CHECK((Eigen::MatrixXd(R).leftCols(8) - Eigen::MatrixXd(Q)).norm() == 0.0);

    const Axis pt = Axis::point(std::log(0.2));
    CHECK(pt.is_point());
    CHECK(pt.n_all() == 1);
    CHECK(pt.n_active() == 1);
    const Eigen::MatrixXd pm(assemble_1d(BlockKind::M, WeightSpec::exponential(2.0), pt));
    CHECK(pm(0, 0) == doctest::Approx(0.04));
    CHECK(Eigen::MatrixXd(assemble_1d(BlockKind::S, WeightSpec::unit(), pt))(0, 0) == 0.0);
    CHECK(Eigen::MatrixXd(assemble_1d(BlockKind::B, WeightSpec::unit(), pt))(0, 0) == 0.0);
}

TEST_CASE("term lists") {
    const SabrParams p{0.5, -0.3, 1.0, 1.0, 0.2};
    const auto terms = stiffness_terms(p, -0.5);
    REQUIRE(terms.size() == 6);
    CHECK(terms[0].coeff == 0.5);
    CHECK(terms[1].coeff == doctest::Approx(-0.3));
    CHECK(terms[1].kind_y == BlockKind::BT);
    CHECK(terms[3].weight_x.param == doctest::Approx(-0.5));
    const auto cev = stiffness_terms({0.5, -0.3, 0.0, 1.0, 0.2}, -0.5);
    int nonzero = 0;
    for (std::size_t i = 0; i < cev.size(); ++i) {
        if (cev[i].coeff != 0.0) {
            ++nonzero;
            CHECK((i == 0 || i == 3));
        }
    }
    CHECK(nonzero == 2);
    const auto uncorrelated = stiffness_terms({0.5, 0.0, 1.0, 1.0, 0.2}, -0.5);
    CHECK(uncorrelated[1].coeff == 0.0);
    CHECK(uncorrelated[4].coeff == 0.0);
    CHECK(mass_terms(-0.5).size() == 1);
    CHECK(vnorm_terms(p, -0.5).size() == 3);
}

TEST_CASE("every Kronecker term matches brute-force 2D quadrature at L = 3") {
    const SabrParams p{0.5, -0.3, 1.0, 1.0, 0.2};
    const double mu = -0.5;
    const Axis x = free_axis(0.0, 2.0, 3);
    const Axis y = free_axis(std::log(0.2) - 1.0, std::log(0.2) + 1.0, 3);
    const auto xn = x.coordinates(), yn = y.coordinates();
    std::vector<KroneckerTerm> all = stiffness_terms(p, mu);
    for (const auto& t : mass_terms(mu)) all.push_back(t);
    for (const auto& t : vnorm_terms(p, mu)) all.push_back(t);
    for (const auto& t : all) {
        CAPTURE(t.label);
        const Eigen::MatrixXd got(assemble_terms_rect({t}, x, y));
        const Eigen::MatrixXd ref =
            brute_force_term(t.coeff, factor(t.kind_x, t.weight_x), factor(t.kind_y, t.weight_y), xn, yn);
        CHECK(rel_diff(got, ref) < 1e-10);
    }
}

TEST_CASE("v^T A u equals the bilinear form evaluated by quadrature") {
    const Axis x = free_axis(0.0, 2.0, 3);
    const Axis y = free_axis(std::log(0.2) - 1.0, std::log(0.2) + 1.0, 3);
    for (const SabrParams p : {SabrParams{0.5, -0.3, 1.0, 1.0, 0.2}, SabrParams{0.2, 0.4, 0.7, 1.0, 0.3}}) {
        const double mu = -p.beta;
        const Eigen::MatrixXd A(assemble_stiffness(p, mu, x, y));
        for (std::uint64_t seed : {1u, 2u}) {
            const auto u = random_vector(static_cast<int>(A.cols()), seed);
            const auto v = random_vector(static_cast<int>(A.cols()), seed + 100);
            const double ref = bilinear_form(p, mu, x.coordinates(), y.coordinates(), u, v);
            CHECK(v.dot(A * u) == doctest::Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("M and G symmetric positive definite; G dominates the mass") {
    const SabrParams p{0.5, -0.3, 1.0, 1.0, 0.2};
    const Axis x = Axis::mesh(Basis1D(build_mesh({0.0, 4.0}, 4), Boundary::free, Boundary::essential_zero));
    const Axis y = dirichlet_axis(std::log(0.2) - 3.0, std::log(0.2) + 3.0, 4);
    const auto op = assemble_operator(p, -0.5, x, y);
    const Eigen::MatrixXd M(op.mass), G(op.vnorm_gram);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-14 * M.cwiseAbs().maxCoeff());
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-14 * G.cwiseAbs().maxCoeff());
    CHECK(sym_eig_min(M) > 0.0);
    CHECK(sym_eig_min(G) > 0.0);
    const Eigen::MatrixXd plain(assemble_terms_rect(mass_terms(-0.5), x, y));
    const Eigen::MatrixXd plain_sq = Eigen::MatrixXd(active_columns(assemble_terms_rect(mass_terms(-0.5), x, y), x, y));
    CHECK(plain.rows() == M.rows());
    CHECK(sym_eig_min(G - plain_sq) > -1e-12 * G.norm());
    CHECK((Eigen::MatrixXd(op.mass) - Eigen::MatrixXd(active_columns(op.mass_coupling, x, y))).norm() == 0.0);
    CHECK((Eigen::MatrixXd(op.stiffness) - Eigen::MatrixXd(active_columns(op.stiffness_coupling, x, y))).norm() == 0.0);
}

TEST_CASE("discrete Garding and continuity at L = 3") {
    const SabrParams p{0.5, -0.3, 1.0, 1.0, 0.2};
    const Axis x = Axis::mesh(Basis1D(build_mesh({0.0, 4.0}, 3), Boundary::essential_zero, Boundary::essential_zero));
    const Axis y = dirichlet_axis(std::log(0.2) - 3.0, std::log(0.2) + 3.0, 3);
    const auto cert = wellposedness_constants(p, -0.5);
    const auto op = assemble_operator(p, -0.5, x, y);
    const Eigen::MatrixXd A(op.stiffness), M(op.mass), G(op.vnorm_gram);
    CHECK(sym_eig_min(A + cert.C3 * M - cert.C2 * G) >= -1e-8 * spectral_norm_sym(G));
    for (int k = 0; k < 20; ++k) {
        const auto u = random_vector(op.n_active(), 500 + k);
        const auto v = random_vector(op.n_active(), 900 + k);
        CHECK(std::abs(u.dot(A * v)) <= cert.C1 * std::sqrt(u.dot(G * u) * v.dot(G * v)));
    }
}

TEST_CASE("restrict_full and expand are inverse on the active dofs") {
    const Axis x = Axis::mesh(Basis1D(build_mesh({0.0, 4.0}, 2), Boundary::free, Boundary::essential_zero));
    const Axis y = dirichlet_axis(-1.0, 1.0, 2);
    const auto op = assemble_operator({0.5, 0.0, 1.0, 1.0, 0.2}, -0.5, x, y);
    CHECK(op.n_all() == 25);
    CHECK(op.n_active() == 4 * 3);
    const auto full = random_vector(op.n_all(), 3);
    const auto act = op.restrict_full(full);
    CHECK((op.expand(act, full) - full).norm() == 0.0);
    for (int k = 0; k < op.n_active(); ++k) CHECK(act[k] == full[op.active_to_full[k]]);
    CHECK(op.active_to_full.front() == 0 * 5 + 1);
}

TEST_CASE("singular first-cell integral is rejected") {
    const Axis x = free_axis(0.0, 1.0, 2);
    const Axis y = free_axis(-1.0, 1.0, 2);
    CHECK_THROWS_AS(assemble_stiffness({0.5, 0.0, 1.0, 1.0, 0.2}, -1.0, x, y), SingularIntegralError);
}

TEST_CASE("matrix market dump") {
    const Axis x = free_axis(0.0, 1.0, 1);
    const Axis y = Axis::point(0.0);
    const SpMat M = assemble_mass(0.0, x, y);
    const auto path = (std::filesystem::temp_directory_path() / "sabrfem_test_mass.mtx").string();
    write_matrix_market(M, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("%%MatrixMarket", 0) == 0);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_matrix_market(M, "/nonexistent-dir/x.mtx"), IoError);
}
