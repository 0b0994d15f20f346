#include "sabrfem/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sabrfem/errors.hpp"

namespace sabrfem {

namespace {

void check_finite(const char* field, double v) {
    if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Offset applied to mu when 2 beta + mu hits 1 and the Hardy constant in the
// continuity estimate is unbounded.
constexpr double kHardyPerturbation = 1e-6;

}  // namespace

Validation validate_params(const SabrParams& p) {
    check_finite("beta", p.beta);
    check_finite("rho", p.rho);
    check_finite("nu", p.nu);
    check_finite("x0", p.x0);
    check_finite("y0", p.y0);
    if (p.beta < 0.0 || p.beta > 1.0) throw ValidationError("beta", "must lie in [0, 1], got " + fmt(p.beta));
    if (std::abs(p.rho) > 1.0) throw ValidationError("rho", "must lie in [-1, 1], got " + fmt(p.rho));
    if (p.nu < 0.0) throw ValidationError("nu", "must be >= 0, got " + fmt(p.nu));
    if (p.x0 <= 0.0) throw ValidationError("x0", "must be > 0, got " + fmt(p.x0));
    if (p.y0 <= 0.0) throw ValidationError("y0", "must be > 0, got " + fmt(p.y0));

    const double q = std::abs(p.rho) * p.nu * p.nu;
    if (q >= 2.0) {
        return {false, "rho*nu^2", "|rho| nu^2 = " + fmt(q) + " violates |rho| nu^2 < 2"};
    }
    return {};
}

void require_valid(const SabrParams& p) {
    const auto v = validate_params(p);
    if (!v) throw ValidationError(v.field, v.reason);
}

MuRange mu_range(double beta) {
    if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0) {
        throw ValidationError("beta", "must lie in [0, 1], got " + fmt(beta));
    }
    if (beta < 0.5) return {{-2.0 * beta, 0.0}, -beta};
    if (beta < 1.0) return {{-1.0, 1.0 - 2.0 * beta}, -beta};
    return {{0.0, 0.0}, 0.0};
}

double resolve_mu(double beta, double mu) {
    const auto range = mu_range(beta);
    if (std::isnan(mu)) return range.default_mu;
    // Allow round-off at the interval ends.
    constexpr double slack = 1e-12;
    if (mu < range.interval.lo - slack || mu > range.interval.hi + slack) {
        throw ValidationError("mu", "mu = " + fmt(mu) + " outside the admissible interval [" +
                                        fmt(range.interval.lo) + ", " + fmt(range.interval.hi) +
                                        "] for beta = " + fmt(beta));
    }
    return std::clamp(mu, range.interval.lo, range.interval.hi);
}

bool delta_interval_nonempty(double rho, double nu) {
    const double rn = std::abs(rho) * nu;
    if (rn == 0.0) return true;
    return std::abs(rho) * nu * nu * nu / 2.0 < 2.0 / rn;
}

WellPosednessCert wellposedness_constants(const SabrParams& p, double mu) {
    require_valid(p);
    WellPosednessCert cert;
    cert.mu = resolve_mu(p.beta, mu);

    const double hardy = 2.0 * p.beta + cert.mu - 1.0;
    if (std::abs(hardy) < kHardyPerturbation) {
        cert.mu -= kHardyPerturbation;
        cert.warnings.push_back("2*beta + mu = 1: Hardy constant unbounded, mu perturbed by -1e-6");
    }

    const double r = std::abs(p.rho);
    const double nu = p.nu;
    const double rn3 = r * nu * nu * nu;

    if (r * nu == 0.0) {
        cert.delta = 1.0;
        cert.epsilon = 1.0;
    } else {
        // Geometric midpoint of (|rho| nu^3 / 2, 2 / (|rho| nu)).
        cert.delta = std::sqrt((rn3 / 2.0) * (2.0 / (r * nu)));
        cert.epsilon = 0.5 * (2.0 / rn3 - 1.0 / cert.delta);
    }

    const double c2_vol = nu * nu / 2.0 - rn3 * cert.delta / 4.0;
    const double c2_spot = 0.5 - rn3 / (4.0 * cert.delta) - rn3 * cert.epsilon / 4.0;
    // Without volatility of volatility the y-gradient drops out of the norm.
    cert.C2 = nu == 0.0 ? c2_spot : std::min(c2_vol, c2_spot);
    cert.C3 = cert.C2 + rn3 / (4.0 * cert.epsilon);

    const double s = 2.0 * p.beta + cert.mu;
    cert.C1 = 0.5 + s / std::abs(s - 1.0) + 2.0 * r * nu * std::max(1.0, nu * nu / 2.0) + nu * nu;
    return cert;
}

CoefficientSet operator_coefficients(const SabrParams& p, double mu) {
    CoefficientSet c;
    c.Qxx = 0.5;
    c.Qxy = p.rho * p.nu;
    c.Qyy = p.nu * p.nu / 2.0;
    c.cx1 = (2.0 * p.beta + mu) / 2.0;
    c.cx2 = p.rho * p.nu;
    c.cy = p.nu * p.nu / 2.0;
    return c;
}

}  // namespace sabrfem
