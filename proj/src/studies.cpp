#include "sabrfem/studies.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "sabrfem/errors.hpp"
#include "sabrfem/multiresolution.hpp"

namespace sabrfem {

double fit_rate(const std::vector<double>& grid, const std::vector<double>& errors, bool by_step) {
    if (grid.size() != errors.size()) throw ValidationError("errors", "grid and error lengths differ");
    if (grid.size() < 3) throw ValidationError("grid", "a rate fit needs at least three points");
    // Order from coarse to fine.
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < grid.size(); ++i) pts.emplace_back(grid[i], errors[i]);
    std::sort(pts.begin(), pts.end(), [by_step](const auto& a, const auto& b) {
        return by_step ? a.first > b.first : a.first < b.first;
    });
    if (pts.size() >= 4) pts.erase(pts.begin());

    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [g, e] : pts) {
        if (!(e > 0.0) || !std::isfinite(e)) continue;
        xs.push_back(by_step ? std::log2(g) : g);
        ys.push_back(std::log2(e));
    }
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / n;
        my += ys[i] / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    return by_step ? slope : -slope;
}

namespace {

bool decreasing(const std::vector<double>& e) {
    for (std::size_t i = 1; i < e.size(); ++i) {
        if (!(e[i] < e[i - 1])) return false;
    }
    return true;
}

Axis free_axis(const Axis& a) {
    if (a.is_point()) return a;
    return Axis::mesh(Basis1D(a.basis().mesh(), Boundary::free, Boundary::free));
}

double quad_norm(const SpMat& m, const Eigen::VectorXd& e) { return std::sqrt(std::max(0.0, e.dot(m * e))); }

void finish(ConvergenceReport& r, bool by_step) {
    r.slope_h = fit_rate(r.grid, r.error_h, by_step);
    r.slope_energy = fit_rate(r.grid, r.error_energy, by_step);
    r.monotone = decreasing(r.error_h) && decreasing(r.error_energy);
    if (!r.monotone) r.warnings.push_back("error sequence is not monotonically decreasing");
}

// int w(s) * D^a F(s) * D^b phi_i(s) over the active nodes of an axis.
Eigen::VectorXd smooth_loads(const std::function<double(double)>& F, const std::function<double(double)>& dF,
                             BlockKind kind, WeightSpec w, const Axis& axis) {
    const bool trial_d = kind == BlockKind::S || kind == BlockKind::B;
    const bool test_d = kind == BlockKind::S || kind == BlockKind::BT;
    const auto& G = trial_d ? dF : F;
    if (axis.is_point()) {
        const double c = axis.point_coordinate();
        if (test_d) return Eigen::VectorXd::Zero(1);
        const double wv = w.family == WeightSpec::Family::exponential ? std::exp(w.param * c)
                                                                      : (w.param == 0.0 ? 1.0 : std::pow(c, w.param));
        return Eigen::VectorXd::Constant(1, wv * G(c));
    }
    const Basis1D& basis = axis.basis();
    const DyadicMesh& mesh = basis.mesh();
    const bool power = w.family == WeightSpec::Family::power;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(basis.size());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell cell = mesh.cell(c);
        const double h = cell.width();
        for (int p = 0; p < 2; ++p) {
            const int i = basis.dof_of_node(c + p);
            if (i < 0) continue;
            auto shape = [&](double s) {
                if (test_d) return p == 0 ? -1.0 / h : 1.0 / h;
                const double t = (s - cell.x0) / h;
                return p == 0 ? 1.0 - t : t;
            };
            auto g = [&](double s) { return (power ? 1.0 : std::exp(w.param * s)) * G(s) * shape(s); };
            b[i] += integrate_weighted(g, cell, power ? w.param : 0.0, 10);
        }
    }
    return b;
}

// int w (D F)^2 over the axis.
double smooth_norm_sq(const std::function<double(double)>& F, const std::function<double(double)>& dF, bool deriv,
                      WeightSpec w, const Axis& axis) {
    const auto& G = deriv ? dF : F;
    if (axis.is_point()) {
        if (deriv) return 0.0;
        const double c = axis.point_coordinate();
        const double wv = w.family == WeightSpec::Family::exponential ? std::exp(w.param * c)
                                                                      : (w.param == 0.0 ? 1.0 : std::pow(c, w.param));
        return wv * G(c) * G(c);
    }
    const DyadicMesh& mesh = axis.basis().mesh();
    const bool power = w.family == WeightSpec::Family::power;
    double sum = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        auto g = [&](double s) { return (power ? 1.0 : std::exp(w.param * s)) * G(s) * G(s); };
        sum += integrate_weighted(g, mesh.cell(c), power ? w.param : 0.0, 10);
    }
    return sum;
}

Eigen::VectorXd kron_vec(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

struct Separable {
    std::function<double(double)> X, dX, Y, dY;
};

Eigen::VectorXd term_loads(const std::vector<KroneckerTerm>& terms, const Separable& u, const Axis& x, const Axis& y) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.n_active() * y.n_active());
    for (const auto& t : terms) {
        if (t.coeff == 0.0) continue;
        g += t.coeff * kron_vec(smooth_loads(u.X, u.dX, t.kind_x, t.weight_x, x),
                                smooth_loads(u.Y, u.dY, t.kind_y, t.weight_y, y));
    }
    return g;
}

double gram_norm_sq(const std::vector<KroneckerTerm>& terms, const Separable& u, const Axis& x, const Axis& y) {
    double s = 0.0;
    for (const auto& t : terms) {
        const bool dx = t.kind_x == BlockKind::S;
        const bool dy = t.kind_y == BlockKind::S;
        s += t.coeff * smooth_norm_sq(u.X, u.dX, dx, t.weight_x, x) * smooth_norm_sq(u.Y, u.dY, dy, t.weight_y, y);
    }
    return s;
}

}  // namespace

ConvergenceReport spatial_convergence_study(const SabrParams& p, const Payoff& payoff, const std::vector<int>& levels,
                                            const ThetaConfig& config, const DiscretizationSpec& base) {
    if (levels.size() < 3) throw ValidationError("levels", "need at least three levels");
    if (!std::is_sorted(levels.begin(), levels.end()) ||
        std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
        throw ValidationError("levels", "must be strictly increasing");
    }
    const DiscretizationSpec resolved = resolve_spec(p, payoff, config.T, base);
    auto at_level = [&](int L) {
        DiscretizationSpec s = resolved;
        s.L_x = L;
        s.L_y = L;
        return s;
    };
    const int L_ref = levels.back() + 2;
    const DiscretizationSpec ref_spec = at_level(L_ref);
    const PriceSurface ref = price_european(p, payoff, ref_spec, config);

    const Axis xf = free_axis(build_x_axis(ref_spec));
    const Axis yf = free_axis(build_y_axis(p, ref_spec));
    const SpMat M = assemble_terms_rect(mass_terms(resolved.mu), xf, yf);
    const SpMat G = assemble_terms_rect(vnorm_terms(p, resolved.mu), xf, yf);

    ConvergenceReport r;
    std::ostringstream os;
    os << "spatial study, " << payoff.describe() << ", beta=" << p.beta << " rho=" << p.rho << " nu=" << p.nu
       << " T=" << config.T << " theta=" << config.theta << " steps=" << config.steps;
    r.description = os.str();
    r.reference = "solution at level " + std::to_string(L_ref);
    r.nominal_h = 2.0;
    r.nominal_energy = 1.0 - p.beta;

    const auto& xs = ref.x_nodes;
    const auto& ys = ref.y_nodes;
    for (int L : levels) {
        const PriceSurface s = price_european(p, payoff, at_level(L), config);
        Eigen::VectorXd e(ref.values.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < ys.size(); ++j) {
                const Eigen::Index idx = static_cast<Eigen::Index>(i * ys.size() + j);
                e[idx] = ref.values[idx] - s.value_at(xs[i], ys[j]);
            }
        r.grid.push_back(L);
        r.error_h.push_back(quad_norm(M, e));
        r.error_energy.push_back(quad_norm(G, e));
    }
    finish(r, false);
    return r;
}

ConvergenceReport manufactured_convergence_study(const SabrParams& p, const std::vector<int>& levels,
                                                 const ThetaConfig& config, const DiscretizationSpec& base) {
    if (levels.size() < 3) throw ValidationError("levels", "need at least three levels");
    config.validate();
    const DiscretizationSpec resolved = resolve_spec(p, Payoff::put(p.x0), config.T, base);
    const double R = resolved.R_x;
    const double a = resolved.y_center - resolved.R_y;
    const double b = resolved.y_center + resolved.R_y;
    Separable u;
    u.X = [R](double x) { return x * (R - x); };
    u.dX = [R](double x) { return R - 2.0 * x; };
    if (p.is_cev()) {
        u.Y = [](double) { return 1.0; };
        u.dY = [](double) { return 0.0; };
    } else {
        u.Y = [a, b](double y) { return (y - a) * (b - y); };
        u.dY = [a, b](double y) { return a + b - 2.0 * y; };
    }

    ConvergenceReport r;
    std::ostringstream os;
    os << "manufactured solution exp(-t) x(R_x-x)(y-a)(b-y), beta=" << p.beta << " rho=" << p.rho << " nu=" << p.nu
       << " T=" << config.T << " theta=" << config.theta << " steps=" << config.steps;
    r.description = os.str();
    r.reference = "exact solution";
    r.nominal_h = 2.0;
    r.nominal_energy = 1.0;

    for (int L : levels) {
        DiscretizationSpec s = resolved;
        s.L_x = L;
        s.L_y = L;
        const Axis x = build_x_axis(s);
        const Axis y = build_y_axis(p, s);
        const TensorOperator op = assemble_operator(p, s.mu, x, y);

        const Eigen::VectorXd ga = term_loads(op.stiffness_factors, u, x, y);
        const Eigen::VectorXd gm = term_loads(op.mass_factors, u, x, y);
        const Eigen::VectorXd gg = term_loads(op.gram_factors, u, x, y);
        Eigen::SimplicialLDLT<SpMat> ldlt(op.mass);
        const Eigen::VectorXd u0 = ldlt.solve(gm);
        const Forcing g = [ga, gm](double t) -> Eigen::VectorXd { return std::exp(-t) * (ga - gm); };
        const Trajectory traj = run_theta_scheme(op.mass, op.stiffness, u0, g, config, false);

        const Eigen::VectorXd& uh = traj.final_state();
        const double tT = std::exp(-config.T);
        const double norm_h = gram_norm_sq(op.mass_factors, u, x, y);
        const double norm_g = gram_norm_sq(op.gram_factors, u, x, y);
        const double eh = tT * tT * norm_h - 2.0 * tT * gm.dot(uh) + uh.dot(op.mass * uh);
        const double eg = tT * tT * norm_g - 2.0 * tT * gg.dot(uh) + uh.dot(op.vnorm_gram * uh);
        r.grid.push_back(L);
        r.error_h.push_back(std::sqrt(std::max(0.0, eh)));
        r.error_energy.push_back(std::sqrt(std::max(0.0, eg)));
    }
    finish(r, false);
    return r;
}

ConvergenceReport temporal_convergence_study(const SabrParams& p, const Payoff& payoff,
                                             const DiscretizationSpec& spec, const std::vector<int>& steps_sequence,
                                             double theta, double T, int startup_steps) {
    if (steps_sequence.size() < 3) throw ValidationError("steps", "need at least three step counts");
    if (!std::is_sorted(steps_sequence.begin(), steps_sequence.end())) {
        throw ValidationError("steps", "must be increasing");
    }
    const DiscretizationSpec resolved = resolve_spec(p, payoff, T, spec);
    const TensorOperator op =
        assemble_operator(p, resolved.mu, build_x_axis(resolved), build_y_axis(p, resolved));
    auto solve = [&](int steps) {
        const ThetaConfig cfg{theta, T, steps, std::min(startup_steps, steps)};
        return op.restrict_full(price_european(p, payoff, resolved, cfg).values);
    };
    const int m_max = steps_sequence.back();
    const int order = theta == 0.5 ? 2 : 1;
    const Eigen::VectorXd u4 = solve(4 * m_max);
    const Eigen::VectorXd u8 = solve(8 * m_max);
    const Eigen::VectorXd ref = u8 + (u8 - u4) / (std::pow(2.0, order) - 1.0);

    ConvergenceReport r;
    std::ostringstream os;
    os << "temporal study, " << payoff.describe() << ", theta=" << theta << " T=" << T << " L_x=" << resolved.L_x
       << " L_y=" << resolved.L_y << " startup=" << startup_steps;
    r.description = os.str();
    r.reference = "Richardson extrapolation of " + std::to_string(4 * m_max) + " and " + std::to_string(8 * m_max) +
                  " steps";
    r.grid_kind = "k";
    r.nominal_h = order;
    r.nominal_energy = order;
    for (int m : steps_sequence) {
        const Eigen::VectorXd e = solve(m) - ref;
        r.grid.push_back(T / m);
        r.error_h.push_back(quad_norm(op.mass, e));
        r.error_energy.push_back(quad_norm(op.vnorm_gram, e));
    }
    finish(r, true);
    return r;
}

ConvergenceReport projection_rate_study(double mu, const std::function<double(double)>& f,
                                        const std::function<double(double)>& df, const std::vector<int>& levels,
                                        Interval interval) {
    if (levels.size() < 3) throw ValidationError("levels", "need at least three levels");
    ConvergenceReport r;
    std::ostringstream os;
    os << "weighted L2 projection, mu=" << mu << " on [" << interval.lo << ", " << interval.hi << "]";
    r.description = os.str();
    r.reference = "cellwise Gauss quadrature of the error";
    r.nominal_h = 2.0;
    r.nominal_energy = 1.0;
    for (int L : levels) {
        const Basis1D basis(build_mesh(interval, L), Boundary::free, Boundary::free);
        const Eigen::VectorXd c = project(f, basis, mu);
        const ProjectionError pe = projection_error(f, df, c, basis, mu, mu, 16);
        r.grid.push_back(L);
        r.error_h.push_back(pe.l2);
        r.error_energy.push_back(std::sqrt(pe.l2 * pe.l2 + pe.h1_seminorm * pe.h1_seminorm));
    }
    finish(r, false);
    return r;
}

}  // namespace sabrfem
