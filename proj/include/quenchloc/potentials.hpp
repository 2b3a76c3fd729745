// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_POTENTIALS_HPP
#define QUENCHLOC_POTENTIALS_HPP

#include "quenchloc/geometry.hpp"
#include "quenchloc/vec3.hpp"

namespace quench::potentials {

// Screened-Poisson potential of the uniform unit source on the ball:
//   Delta v - tau^2 v + chi_B = 0  in R^3,
// radial about the ball center.
struct BallPotential {
    geometry::DetectorBall ball;
    double tau = 0.0;

    void validate() const;  // tau > 0, ball valid
};

// Exterior closed form at distance rho = |x - p| >= r:
//   v(rho) = e^{-tau rho} (tau r cosh(tau r) - sinh(tau r)) / (tau^3 rho).
// Evaluated in the log domain and exponentiated last. Throws for rho < r.
double v_exterior(const Vec3& x, const BallPotential& bp);
double v_exterior_rho(double rho, const BallPotential& bp);
// log v, usable far beyond the underflow range of v itself.
double log_v_exterior_rho(double rho, const BallPotential& bp);

// Radial derivative v'(rho) for rho >= r (negative: v decays outward).
double dv_exterior_rho(double rho, const BallPotential& bp);
// Full gradient v'(rho) (x-p)/rho; throws for rho < r.
Vec3 grad_v_exterior(const Vec3& x, const BallPotential& bp);

// Interior branch v(rho < r) = 1/tau^2 - (1+tau r) e^{-tau r} sinh(tau rho)/(tau^3 rho).
// Only the quadrature oracle's continuity self-test and the L2-norm
// estimate evaluate it; the pipeline never needs v inside B.
double v_interior_rho(double rho, const BallPotential& bp);

// Brute-force evaluation of the defining volume integral
//   v(x) = (1/4pi) int_B e^{-tau|x-y|}/|x-y| dy
// by adaptive quadrature over spherical shells about x, to relative
// tolerance tol.
struct OracleResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};
OracleResult v_quadrature_oracle(const Vec3& x, const BallPotential& bp, double tol);

// min over the patch grid of tau^2 e^{tau d_e(x,B)} v(x), the rescaled
// potential floor that stabilizes to a positive constant for large tau;
// returns the minimum and its location.
struct BandCheck {
    double min_value = 0.0;
    Vec3 argmin;
    double d_e_at_argmin = 0.0;
};
BandCheck rescaled_band_min(const geometry::PatchGrid& grid, const BallPotential& bp);

// Quadrature estimate of ||v||_{L2(R^3)} (radial reduction, interior +
// exterior branches).
double v_l2_norm(const BallPotential& bp);

}  // namespace quench::potentials

#endif
