#include "sabrfem/timestepper.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <memory>

#include "sabrfem/errors.hpp"

namespace sabrfem {

void ThetaConfig::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta", "must lie in [0, 1]");
    if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("T", "must be > 0");
    if (steps < 1) throw ValidationError("steps", "must be >= 1");
    if (startup_steps < 0 || startup_steps > steps) throw ValidationError("startup_steps", "must lie in [0, steps]");
}

ThetaStepper::ThetaStepper(SpMat M, SpMat A, double theta, double k)
    : M_(std::move(M)), A_(std::move(A)), theta_(theta), k_(k) {
    if (M_.rows() != M_.cols() || A_.rows() != A_.cols() || M_.rows() != A_.rows()) {
        throw ValidationError("operators", "M and A must be square with matching sizes");
    }
    if (!(theta_ >= 0.0 && theta_ <= 1.0)) throw ValidationError("theta", "must lie in [0, 1]");
    if (!(k_ > 0.0) || !std::isfinite(k_)) throw ValidationError("k", "step size must be > 0");
    SpMat lhs = M_ / k_ + theta_ * A_;
    rhs_ = M_ / k_ - (1.0 - theta_) * A_;
    lhs.makeCompressed();
    lu_.analyzePattern(lhs);
    lu_.factorize(lhs);
    if (lu_.info() != Eigen::Success) {
        throw NumericalError("system matrix M/k + theta A is singular: " + lu_.lastErrorMessage());
    }
}

Eigen::VectorXd ThetaStepper::step(const Eigen::VectorXd& u, const Eigen::VectorXd& g_theta) const {
    Eigen::VectorXd b = rhs_ * u;
    if (g_theta.size() > 0) b += g_theta;
    return lu_.solve(b);
}

namespace {

Eigen::VectorXd forcing_at(const Forcing& g, double t, double theta, double k) {
    if (!g) return {};
    if (theta == 1.0) return g(t + k);
    if (theta == 0.0) return g(t);
    return theta * g(t + k) + (1.0 - theta) * g(t);
}

double h_norm(const SpMat& M, const Eigen::VectorXd& u) { return std::sqrt(std::max(0.0, u.dot(M * u))); }

Trajectory run_impl(const ThetaStepper& stepper, const ThetaStepper* startup, const Eigen::VectorXd& u0,
                    const Forcing& g, const ThetaConfig& config, bool keep_history) {
    config.validate();
    if (u0.size() != stepper.size()) throw ValidationError("u0", "length does not match the system size");
    const double k = config.k();
    if (std::abs(stepper.k() - k) > 1e-12 * k) throw ValidationError("steps", "stepper k differs from T / steps");

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(u0);
    traj.h_norms.push_back(h_norm(stepper.mass(), u0));

    Eigen::VectorXd u = u0;
    for (int m = 0; m < config.steps; ++m) {
        const double t = m * k;
        if (m < config.startup_steps && startup != nullptr) {
            const double half = 0.5 * k;
            u = startup->step(u, forcing_at(g, t, 1.0, half));
            u = startup->step(u, forcing_at(g, t + half, 1.0, half));
        } else {
            u = stepper.step(u, forcing_at(g, t, stepper.theta(), k));
        }
        if (!u.allFinite()) throw NumericalError("non-finite value in theta-scheme", m + 1);
        traj.times.push_back((m + 1) * k);
        traj.h_norms.push_back(h_norm(stepper.mass(), u));
        if (keep_history || m + 1 == config.steps) traj.states.push_back(u);
    }
    return traj;
}

}  // namespace

Trajectory run_theta_scheme(const ThetaStepper& stepper, const Eigen::VectorXd& u0, const Forcing& g,
                            const ThetaConfig& config, bool keep_history) {
    std::unique_ptr<ThetaStepper> startup;
    if (config.startup_steps > 0) {
        startup = std::make_unique<ThetaStepper>(stepper.mass(), stepper.stiffness(), 1.0, 0.5 * config.k());
    }
    return run_impl(stepper, startup.get(), u0, g, config, keep_history);
}

Trajectory run_theta_scheme(const SpMat& M, const SpMat& A, const Eigen::VectorXd& u0, const Forcing& g,
                            const ThetaConfig& config, bool keep_history) {
    config.validate();
    const ThetaStepper stepper(M, A, config.theta, config.k());
    return run_theta_scheme(stepper, u0, g, config, keep_history);
}

StabilityReport stability_report(const Trajectory& traj, const SpMat& M, const SpMat& A, const ThetaConfig& config,
                                 const Forcing& g, double C1, double C2) {
    config.validate();
    if (config.theta < 0.5) {
        throw UnsupportedConfiguration(
            "stability report needs theta >= 1/2; for theta < 1/2 the estimate depends on lambda_A = sup "
            "||v||_H^2 / ||v||_*^2 and a step-size restriction, which are not computed");
    }
    if (!(C1 > 0.0 && C1 < 2.0)) throw ValidationError("C1", "must lie in (0, 2)");
    if (!(C2 >= 1.0 / (2.0 - C1))) throw ValidationError("C2", "must be >= 1 / (2 - C1)");
    if (static_cast<int>(traj.states.size()) != config.steps + 1) {
        throw ValidationError("trajectory", "stability report needs the full history of states");
    }
    if (config.startup_steps > 0) {
        throw UnsupportedConfiguration("stability report covers the plain theta-scheme without startup steps");
    }

    StabilityReport rep;
    rep.C1 = C1;
    rep.C2 = C2;
    rep.h_norm_initial = h_norm(M, traj.states.front());
    rep.h_norm_final = h_norm(M, traj.states.back());

    SpMat sym = 0.5 * (SpMat(A.transpose()) + A);
    Eigen::SimplicialLDLT<SpMat> ldlt(sym);
    rep.coercive = ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
    if (!rep.coercive) {
        rep.note = "sym(A) is not positive definite; energy norm undefined (shift by C3 M first)";
        return rep;
    }

    const double k = config.k();
    const double theta = config.theta;
    double energy = 0.0;
    double dual = 0.0;
    for (int m = 0; m < config.steps; ++m) {
        const Eigen::VectorXd um = theta * traj.states[m + 1] + (1.0 - theta) * traj.states[m];
        energy += um.dot(sym * um);
        const Eigen::VectorXd gm = forcing_at(g, m * k, theta, k);
        if (gm.size() > 0) dual += gm.dot(ldlt.solve(gm));
    }
    const double h0 = rep.h_norm_initial;
    const double hM = rep.h_norm_final;
    rep.lhs = hM * hM + C1 * k * energy;
    rep.rhs = h0 * h0 + C2 * k * dual;
    rep.margin = rep.rhs - rep.lhs;
    rep.passed = rep.lhs <= rep.rhs * (1.0 + 1e-10);
    return rep;
}

}  // namespace sabrfem
