#pragma once

// Theta-scheme for M u' + A u = g:
//   (M/k + theta A) u^{m+1} = (M/k - (1 - theta) A) u^m + g^{m+theta}.

#include <Eigen/Core>
#include <Eigen/SparseLU>
#include <functional>
#include <string>
#include <vector>

#include "sabrfem/assembly.hpp"

namespace sabrfem {

struct ThetaConfig {
    double theta = 0.5;
    double T = 1.0;
    int steps = 100;
    /// Number of leading steps replaced by two backward-Euler half steps
    /// each (damps the high modes of nonsmooth initial data).
    int startup_steps = 0;

    double k() const noexcept { return T / steps; }
    void validate() const;
};

/// g(t); an empty function means g = 0.
using Forcing = std::function<Eigen::VectorXd(double)>;

class ThetaStepper {
public:
    /// Factorizes M/k + theta A once (sparse LU with pivoting).
    ThetaStepper(SpMat M, SpMat A, double theta, double k);

    double theta() const noexcept { return theta_; }
    double k() const noexcept { return k_; }
    const SpMat& mass() const noexcept { return M_; }
    const SpMat& stiffness() const noexcept { return A_; }
    Eigen::Index size() const noexcept { return M_.rows(); }

    /// One step; g_theta is the already time-averaged forcing (may be empty).
    Eigen::VectorXd step(const Eigen::VectorXd& u, const Eigen::VectorXd& g_theta) const;

private:
    SpMat M_;
    SpMat A_;
    double theta_;
    double k_;
    SpMat rhs_;
    Eigen::SparseLU<SpMat> lu_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;  ///< every step, or first and last only
    std::vector<double> h_norms;          ///< ||u^m||_H = sqrt(u^T M u) for every m

    const Eigen::VectorXd& final_state() const { return states.back(); }
};

/// Runs config.steps steps from u0. With keep_history = false only u^0 and
/// u^M are stored (norms are always recorded). Throws NumericalError on
/// non-finite values, naming the step.
Trajectory run_theta_scheme(const ThetaStepper& stepper, const Eigen::VectorXd& u0, const Forcing& g,
                            const ThetaConfig& config, bool keep_history = true);

/// Convenience overload that builds the stepper (and the startup stepper).
Trajectory run_theta_scheme(const SpMat& M, const SpMat& A, const Eigen::VectorXd& u0, const Forcing& g,
                            const ThetaConfig& config, bool keep_history = true);

struct StabilityReport {
    bool passed = false;
    bool coercive = false;  ///< sym(A) positive definite, so the energy norm exists
    double lhs = 0.0;       ///< ||u^M||_H^2 + C1 k sum ||u^{m+theta}||_a^2
    double rhs = 0.0;       ///< ||u^0||_H^2 + C2 k sum ||g^{m+theta}||_*^2
    double margin = 0.0;    ///< rhs - lhs
    double C1 = 0.0;
    double C2 = 0.0;
    double h_norm_initial = 0.0;
    double h_norm_final = 0.0;
    std::string note;
};

/// Checks the discrete energy estimate on a full trajectory. The energy norm
/// is ||v||_a^2 = v^T sym(A) v with dual norm sqrt(f^T sym(A)^{-1} f).
/// Requires theta >= 1/2, C1 in (0, 2) and C2 >= 1/(2 - C1).
StabilityReport stability_report(const Trajectory& traj, const SpMat& M, const SpMat& A, const ThetaConfig& config,
                                 const Forcing& g = {}, double C1 = 1.0, double C2 = 1.0);

}  // namespace sabrfem
