#include "sabrfem/pricing.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "sabrfem/errors.hpp"

namespace sabrfem {

Payoff Payoff::call(double K) {
    if (!(K > 0.0) || !std::isfinite(K)) throw ValidationError("strike", "must be > 0");
    return {Kind::call, K, {}};
}

Payoff Payoff::put(double K) {
    if (!(K > 0.0) || !std::isfinite(K)) throw ValidationError("strike", "must be > 0");
    return {Kind::put, K, {}};
}

Payoff Payoff::mass_zero_put(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("eps", "must be > 0");
    return {Kind::mass_zero_put, eps, {}};
}

Payoff Payoff::identity() { return {Kind::identity, 0.0, {}}; }

Payoff Payoff::custom(std::function<double(double)> f) {
    if (!f) throw ValidationError("payoff", "custom payoff needs a function");
    return {Kind::custom, 0.0, std::move(f)};
}

double Payoff::operator()(double x) const {
    switch (kind) {
        case Kind::call: return std::max(x - strike, 0.0);
        case Kind::put: return std::max(strike - x, 0.0);
        case Kind::mass_zero_put: return std::max(1.0 - x / strike, 0.0);
        case Kind::identity: return x;
        case Kind::custom: return fn(x);
    }
    return 0.0;
}

std::vector<double> Payoff::kinks() const {
    if (kind == Kind::call || kind == Kind::put || kind == Kind::mass_zero_put) return {strike};
    return {};
}

std::string Payoff::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::call: os << "call(K=" << strike << ")"; break;
        case Kind::put: os << "put(K=" << strike << ")"; break;
        case Kind::mass_zero_put: os << "mass_zero_put(eps=" << strike << ")"; break;
        case Kind::identity: os << "identity"; break;
        case Kind::custom: os << "custom"; break;
    }
    return os.str();
}

DiscretizationSpec resolve_spec(const SabrParams& p, const Payoff& payoff, double T, DiscretizationSpec s) {
    require_valid(p);
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T", "must be > 0");
    if (s.L_x < 0 || s.L_x > 12) throw ValidationError("L_x", "must lie in [0, 12]");
    if (s.L_y < 0 || s.L_y > 12) throw ValidationError("L_y", "must lie in [0, 12]");
    if (s.base_cells_x < 1) throw ValidationError("base_cells_x", "must be >= 1");
    if (s.base_cells_y < 1) throw ValidationError("base_cells_y", "must be >= 1");

    if (std::isnan(s.R_x)) {
        const bool struck = payoff.kind == Payoff::Kind::call || payoff.kind == Payoff::Kind::put ||
                            payoff.kind == Payoff::Kind::mass_zero_put;
        const double scale = struck ? std::max(p.x0, payoff.strike) : p.x0;
        s.R_x = std::max(4.0 * scale, 4.0);
    }
    if (std::isnan(s.R_y)) s.R_y = std::max(3.0, 3.0 * p.nu * std::sqrt(T));
    if (std::isnan(s.y_center)) s.y_center = std::log(p.y0);
    s.mu = resolve_mu(p.beta, s.mu);

    if (!(s.R_x > 0.0) || !std::isfinite(s.R_x)) throw ValidationError("R_x", "must be > 0");
    if (!(s.R_y > 0.0) || !std::isfinite(s.R_y)) throw ValidationError("R_y", "must be > 0");
    if (!std::isfinite(s.y_center)) throw ValidationError("y_center", "must be finite");
    if (!(p.x0 < s.R_x)) throw ValidationError("R_x", "x0 must lie strictly inside [0, R_x)");
    if (!p.is_cev() && !(std::abs(std::log(p.y0) - s.y_center) < s.R_y)) {
        throw ValidationError("R_y", "ln y0 must lie strictly inside the log-vol interval");
    }
    return s;
}

Axis build_x_axis(const DiscretizationSpec& spec) {
    const DyadicMesh mesh = build_mesh({0.0, spec.R_x}, spec.L_x, spec.base_cells_x);
    const Boundary left = spec.origin == OriginBC::absorbing ? Boundary::essential_zero : Boundary::free;
    return Axis::mesh(Basis1D(mesh, left, Boundary::essential_zero));
}

Axis build_y_axis(const SabrParams& p, const DiscretizationSpec& spec) {
    if (p.is_cev()) return Axis::point(std::log(p.y0));
    const DyadicMesh mesh =
        build_mesh({spec.y_center - spec.R_y, spec.y_center + spec.R_y}, spec.L_y, spec.base_cells_y);
    return Axis::mesh(Basis1D(mesh, Boundary::essential_zero, Boundary::essential_zero));
}

namespace {

Axis free_copy(const Axis& a) {
    if (a.is_point()) return a;
    return Axis::mesh(Basis1D(a.basis().mesh(), Boundary::free, Boundary::free));
}

double integrate_split(const std::function<double(double)>& g, const Cell& cell, double a,
                       const std::vector<double>& kinks) {
    std::vector<double> pts{cell.x0};
    for (double k : kinks) {
        if (k > cell.x0 && k < cell.x1) pts.push_back(k);
    }
    pts.push_back(cell.x1);
    std::sort(pts.begin(), pts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) sum += integrate_weighted(g, {pts[i], pts[i + 1]}, a, 10);
    return sum;
}

// Loads int f phi_i x^a over every x node, and int f^2 x^a.
Eigen::VectorXd x_loads(const Payoff& f, const Axis& x, double a, double& norm_sq) {
    const DyadicMesh& mesh = x.basis().mesh();
    const auto kinks = f.kinks();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.n_nodes());
    norm_sq = 0.0;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell cell = mesh.cell(c);
        const double h = cell.width();
        b[c] += integrate_split([&](double s) { return f(s) * (cell.x1 - s) / h; }, cell, a, kinks);
        b[c + 1] += integrate_split([&](double s) { return f(s) * (s - cell.x0) / h; }, cell, a, kinks);
        norm_sq += integrate_split([&](double s) { return f(s) * f(s); }, cell, a, kinks);
    }
    return b;
}

Eigen::VectorXd y_loads(const Axis& y, double& length) {
    if (y.is_point()) {
        length = 1.0;
        return Eigen::VectorXd::Ones(1);
    }
    const DyadicMesh& mesh = y.basis().mesh();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.n_nodes());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        b[c] += 0.5 * mesh.h();
        b[c + 1] += 0.5 * mesh.h();
    }
    length = mesh.interval.hi - mesh.interval.lo;
    return b;
}

Eigen::VectorXd kron_vec(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

}  // namespace

Eigen::VectorXd boundary_values(const Payoff& payoff, const TensorOperator& op, const DiscretizationSpec& spec) {
    const int nx = op.x.n_all();
    const int ny = op.y.n_all();
    const auto xs = op.x.coordinates();
    std::vector<char> active(static_cast<std::size_t>(nx) * ny, 0);
    for (int f : op.active_to_full) active[f] = 1;

    Eigen::VectorXd u = Eigen::VectorXd::Zero(nx * ny);
    for (int ix = 0; ix < nx; ++ix) {
        for (int iy = 0; iy < ny; ++iy) {
            const int idx = ix * ny + iy;
            if (active[idx]) continue;
            double v = 0.0;
            if (ix == nx - 1) {
                v = 0.0;
            } else if (ix == 0 && spec.origin == OriginBC::absorbing) {
                v = payoff(0.0);
            } else if (!op.y.is_point() && iy == 0) {
                v = spec.lower_vol == VolEdgeBC::intrinsic ? payoff(xs[ix]) : 0.0;
            } else if (!op.y.is_point() && iy == ny - 1) {
                v = spec.upper_vol == VolEdgeBC::intrinsic ? payoff(xs[ix]) : 0.0;
            }
            u[idx] = v;
        }
    }
    return u;
}

InitialData project_payoff(const Payoff& payoff, const TensorOperator& op, const DiscretizationSpec& spec) {
    InitialData init;
    init.boundary = boundary_values(payoff, op, spec);

    double fx_sq = 0.0;
    double y_len = 0.0;
    const Eigen::VectorXd bx = x_loads(payoff, op.x, spec.mu, fx_sq);
    const Eigen::VectorXd by = y_loads(op.y, y_len);
    const Eigen::VectorXd b_full = kron_vec(bx, by);

    const Eigen::VectorXd rhs = op.restrict_full(b_full) - op.mass_coupling * init.boundary;
    Eigen::SimplicialLDLT<SpMat> ldlt(op.mass);
    if (ldlt.info() != Eigen::Success) throw NumericalError("mass matrix factorization failed");
    init.active = ldlt.solve(rhs);
    init.full = op.expand(init.active, init.boundary);
    init.boundary_mismatch = std::abs(payoff(op.x.coordinates().back()));

    const double f_sq = fx_sq * y_len;
    try {
        const Axis xf = free_copy(op.x);
        const Axis yf = free_copy(op.y);
        const SpMat m_full = assemble_terms_rect(mass_terms(spec.mu), xf, yf);
        init.projection_error = std::sqrt(std::max(0.0, f_sq - 2.0 * b_full.dot(init.full) +
                                                            init.full.dot(m_full * init.full)));
        Eigen::SimplicialLDLT<SpMat> full_ldlt(m_full);
        const Eigen::VectorXd best = full_ldlt.solve(b_full);
        init.best_error = std::sqrt(std::max(0.0, f_sq - b_full.dot(best)));
    } catch (const SingularIntegralError&) {
        init.projection_error = std::numeric_limits<double>::quiet_NaN();
        init.best_error = std::numeric_limits<double>::quiet_NaN();
    }
    return init;
}

double PriceSurface::value_at(double x, double y) const {
    const double rx = x_nodes.back();
    const double tol = 1e-12 * rx;
    if (!(x >= -tol && x <= rx + tol)) throw ValidationError("x", "evaluation point outside [0, R_x]");
    const int nx = static_cast<int>(x_nodes.size());
    const int ny = static_cast<int>(y_nodes.size());
    const double hx = rx / (nx - 1);
    const int ix = std::clamp(static_cast<int>(std::floor(x / hx)), 0, nx - 2);
    const double tx = std::clamp((x - x_nodes[ix]) / hx, 0.0, 1.0);
    auto at = [&](int i, int j) { return values[i * ny + j]; };
    if (ny == 1) return (1.0 - tx) * at(ix, 0) + tx * at(ix + 1, 0);

    const double y0 = y_nodes.front();
    const double y1 = y_nodes.back();
    const double ytol = 1e-12 * (y1 - y0);
    if (!(y >= y0 - ytol && y <= y1 + ytol)) throw ValidationError("y", "evaluation point outside the log-vol interval");
    const double hy = (y1 - y0) / (ny - 1);
    const int iy = std::clamp(static_cast<int>(std::floor((y - y0) / hy)), 0, ny - 2);
    const double ty = std::clamp((y - y_nodes[iy]) / hy, 0.0, 1.0);
    return (1.0 - tx) * ((1.0 - ty) * at(ix, iy) + ty * at(ix, iy + 1)) +
           tx * ((1.0 - ty) * at(ix + 1, iy) + ty * at(ix + 1, iy + 1));
}

double PriceSurface::point_price() const { return value_at(params.x0, std::log(params.y0)); }

namespace {

// Operator, factorization and time stepping shared by all payoffs on one grid.
class Pricer {
public:
    Pricer(const SabrParams& p, const DiscretizationSpec& resolved, const ThetaConfig& config)
        : p_(p), spec_(resolved), config_(config),
          op_(assemble_operator(p, resolved.mu, build_x_axis(resolved), build_y_axis(p, resolved))),
          stepper_(op_.mass, op_.stiffness, config.theta, config.k()) {
        config_.validate();
        if (p.x0 > 0.9 * spec_.R_x) warnings_.push_back("x0 within 10% of R_x: localization error may dominate");
        if (!p.is_cev() && std::abs(std::log(p.y0) - spec_.y_center) > 0.9 * spec_.R_y) {
            warnings_.push_back("ln y0 within 10% of the log-vol truncation: localization error may dominate");
        }
    }

    PriceSurface solve(const Payoff& payoff) const {
        const InitialData init = project_payoff(payoff, op_, spec_);
        const Eigen::VectorXd g = -(op_.stiffness_coupling * init.boundary);
        Forcing forcing;
        if (g.lpNorm<Eigen::Infinity>() > 0.0) forcing = [g](double) { return g; };
        const Trajectory traj = run_theta_scheme(stepper_, init.active, forcing, config_, false);

        PriceSurface s;
        s.params = p_;
        s.spec = spec_;
        s.T = config_.T;
        s.x_nodes = op_.x.coordinates();
        s.y_nodes = op_.y.coordinates();
        s.values = op_.expand(traj.final_state(), init.boundary);
        s.initial = init.full;
        s.projection_error = init.projection_error;
        s.best_error = init.best_error;
        s.warnings = warnings_;
        if (init.boundary_mismatch > 0.0) {
            s.warnings.push_back("payoff is nonzero at R_x; priced as knock-out at the truncation edge");
        }
        return s;
    }

    const TensorOperator& op() const noexcept { return op_; }

private:
    SabrParams p_;
    DiscretizationSpec spec_;
    ThetaConfig config_;
    TensorOperator op_;
    ThetaStepper stepper_;
    std::vector<std::string> warnings_;
};

}  // namespace

PriceSurface price_european(const SabrParams& p, const Payoff& payoff, const DiscretizationSpec& spec,
                            const ThetaConfig& config) {
    config.validate();
    const DiscretizationSpec resolved = resolve_spec(p, payoff, config.T, spec);
    return Pricer(p, resolved, config).solve(payoff);
}

PriceSurface price_barrier(const SabrParams& p, const Payoff& payoff, const DiscretizationSpec& spec,
                           const ThetaConfig& config, double barrier) {
    config.validate();
    require_valid(p);
    if (!std::isfinite(barrier) || !(barrier > p.x0)) throw ValidationError("barrier", "must exceed x0");
    DiscretizationSpec s = resolve_spec(p, payoff, config.T, spec);
    if (barrier > s.R_x * (1.0 + 1e-12)) throw ValidationError("barrier", "must not exceed R_x");

    const int n = s.base_cells_x << s.L_x;
    const double h = s.R_x / n;
    long iB = std::lround(barrier / h);
    while (iB * h <= p.x0) ++iB;
    iB = std::min<long>(iB, n);
    std::vector<std::string> extra;
    if (std::abs(iB * h - barrier) > 1e-12 * barrier) {
        std::ostringstream os;
        os << "barrier " << barrier << " snapped to the mesh node " << iB * h;
        extra.push_back(os.str());
    }
    const int shift = std::min(std::countr_zero(static_cast<unsigned long>(iB)), s.L_x);
    s.L_x = shift;
    s.base_cells_x = static_cast<int>(iB >> shift);
    s.R_x = iB * h;

    PriceSurface out = Pricer(p, s, config).solve(payoff);
    out.warnings.insert(out.warnings.end(), extra.begin(), extra.end());
    return out;
}

MassAtZeroResult mass_at_zero(const SabrParams& p, double T, const DiscretizationSpec& spec,
                              const ThetaConfig& config, const std::vector<double>& eps_sequence) {
    require_valid(p);
    if (eps_sequence.empty()) throw ValidationError("eps", "need at least one epsilon");
    for (std::size_t i = 0; i < eps_sequence.size(); ++i) {
        if (!(eps_sequence[i] > 0.0)) throw ValidationError("eps", "values must be > 0");
        if (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1])) throw ValidationError("eps", "must be decreasing");
    }
    MassAtZeroResult r;
    r.eps = eps_sequence;
    if (p.beta >= 1.0) {
        r.values.assign(eps_sequence.size(), 0.0);
        r.estimate = 0.0;
        return r;
    }
    ThetaConfig cfg = config;
    cfg.T = T;
    cfg.validate();
    const DiscretizationSpec resolved = resolve_spec(p, Payoff::mass_zero_put(eps_sequence.front()), T, spec);
    const Pricer pricer(p, resolved, cfg);
    const double h0 = resolved.R_x / (resolved.base_cells_x << resolved.L_x);
    for (double eps : eps_sequence) {
        if (eps < 0.5 * h0) {
            std::ostringstream os;
            os << "eps = " << eps << " is below half the first cell width " << h0 << " (under-resolved)";
            r.warnings.push_back(os.str());
        }
        r.values.push_back(pricer.solve(Payoff::mass_zero_put(eps)).point_price());
    }
    r.estimate = r.values.back();
    return r;
}

}  // namespace sabrfem
