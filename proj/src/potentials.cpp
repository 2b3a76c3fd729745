// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/potentials.hpp"

#include <cmath>
#include <stdexcept>

#include "quenchloc/numerics.hpp"

namespace quench::potentials {

void BallPotential::validate() const {
    ball.validate();
    if (!(tau > 0.0)) throw std::invalid_argument("BallPotential: tau must be > 0");
}

double log_v_exterior_rho(double rho, const BallPotential& bp) {
    const double tau = bp.tau, r = bp.ball.radius;
    if (rho < r) throw std::domain_error("v_exterior: point is inside the ball");
    return num::log_ball_kernel(tau * r) - tau * rho - 3.0 * std::log(tau) - std::log(rho);
}

double v_exterior_rho(double rho, const BallPotential& bp) {
    return std::exp(log_v_exterior_rho(rho, bp));
}

double v_exterior(const Vec3& x, const BallPotential& bp) {
    return v_exterior_rho((x - bp.ball.center).norm(), bp);
}

double dv_exterior_rho(double rho, const BallPotential& bp) {
    const double tau = bp.tau;
    if (rho < bp.ball.radius) throw std::domain_error("grad_v_exterior: point is inside the ball");
    // v'(rho) = -(tau rho + 1) v(rho) / rho
    return -(tau * rho + 1.0) / rho * v_exterior_rho(rho, bp);
}

Vec3 grad_v_exterior(const Vec3& x, const BallPotential& bp) {
    const Vec3 d = x - bp.ball.center;
    const double rho = d.norm();
    if (rho <= bp.ball.radius)
        throw std::domain_error("grad_v_exterior: point must be strictly outside the ball");
    return d * (dv_exterior_rho(rho, bp) / rho);
}

double v_interior_rho(double rho, const BallPotential& bp) {
    const double tau = bp.tau, r = bp.ball.radius;
    if (rho > r) throw std::domain_error("v_interior: point is outside the ball");
    const double z = tau * r;
    if (rho < 1e-12 * r)
        return (1.0 - (1.0 + z) * std::exp(-z)) / (tau * tau);
    // sinh(tau rho)/(tau rho) stays O(1) after the e^{-tau r} factor since
    // rho <= r; pair the exponentials to avoid overflow for large tau.
    const double a = tau * rho;
    const double sinh_scaled =
        0.5 * (std::exp(a - z) - std::exp(-a - z));  // e^{-tau r} sinh(tau rho)
    return 1.0 / (tau * tau) - (1.0 + z) * sinh_scaled / (tau * tau * a);
}

OracleResult v_quadrature_oracle(const Vec3& x, const BallPotential& bp, double tol) {
    bp.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("v_quadrature_oracle: tol must be > 0");
    const double rho_c = (x - bp.ball.center).norm();
    const double r = bp.ball.radius, tau = bp.tau;
    if (rho_c <= r) throw std::domain_error("v_quadrature_oracle: x must be outside the ball");

    // Shell reduction of the volume integral: the sphere of radius rho
    // about x cuts B in a cap of solid angle
    //   Omega(rho) = 2 pi (1 - (rho_c^2 + rho^2 - r^2)/(2 rho_c rho)),
    // so (1/4pi) int_B e^{-tau|x-y|}/|x-y| dy
    //    = 1/2 int e^{-tau rho} rho (1 - (rho_c^2+rho^2-r^2)/(2 rho_c rho)) drho.
    // Factor e^{-tau (rho_c - r)} out so the integrand is O(1).
    const auto integrand = [&](double rho) {
        const double cosalpha = (rho_c * rho_c + rho * rho - r * r) / (2.0 * rho_c * rho);
        return 0.5 * std::exp(-tau * (rho - (rho_c - r))) * rho * (1.0 - cosalpha);
    };
    double err = 0.0;
    const double scaled =
        num::adaptive_simpson(integrand, rho_c - r, rho_c + r, tol, 48, &err);

    OracleResult res;
    res.value = scaled * std::exp(-tau * (rho_c - r));
    res.error_estimate = err * std::exp(-tau * (rho_c - r));
    res.converged = !(std::abs(scaled) > 0.0) || err <= 4.0 * tol * std::abs(scaled);
    return res;
}

BandCheck rescaled_band_min(const geometry::PatchGrid& grid, const BallPotential& bp) {
    bp.validate();
    BandCheck out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double rho = (grid.points[i] - bp.ball.center).norm();
        const double d_e = rho - bp.ball.radius;
        // tau^2 e^{tau d_e} v: assemble in the log domain (e^{tau d_e}
        // alone overflows long before the product does).
        const double val =
            std::exp(2.0 * std::log(bp.tau) + bp.tau * d_e + log_v_exterior_rho(rho, bp));
        if (val < best) {
            best = val;
            out.argmin = grid.points[i];
            out.d_e_at_argmin = d_e;
        }
    }
    out.min_value = best;
    return out;
}

double v_l2_norm(const BallPotential& bp) {
    bp.validate();
    const double r = bp.ball.radius, tau = bp.tau;
    const auto inner = [&](double rho) {
        const double v = v_interior_rho(rho, bp);
        return v * v * rho * rho;
    };
    const double i_in = num::adaptive_simpson(inner, 0.0, r, 1e-10);
    // Exterior decays like e^{-2 tau (rho - r)}; cut where the tail is
    // below 1e-30 of the boundary value.
    const double cut = r + 40.0 / tau;
    const auto outer = [&](double rho) {
        const double v = v_exterior_rho(rho, bp);
        return v * v * rho * rho;
    };
    const double i_out = num::adaptive_simpson(outer, r, cut, 1e-10);
    return std::sqrt(4.0 * std::numbers::pi * (i_in + i_out));
}

}  // namespace quench::potentials
