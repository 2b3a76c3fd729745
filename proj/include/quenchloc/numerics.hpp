// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_NUMERICS_HPP
#define QUENCHLOC_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace quench::num {

// Nodes and weights of the n-point Gauss-Legendre rule on [a, b].
struct Quadrature1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

Quadrature1D gauss_legendre(int n, double a = -1.0, double b = 1.0);

// Deterministic pairwise (cascade) summation. Fixed association order, so
// results are bit-identical run to run regardless of how the values were
// produced.
double pairwise_sum(std::span<const double> values);

// phi1(a) = (1 - e^{-a})/a, the 0th exponential integrator weight.
double expm1_ratio(double a);

// phi2(a) = (1 - (1+a) e^{-a})/a^2, via series for small a (the direct
// expression loses all digits below a ~ 1e-4).
double exp_linear_weight(double a);

// log(z cosh z - sinh z), stable for all z > 0. The difference is
// O(z^3) for small z and overflows past z ~ 700 if formed directly.
double log_ball_kernel(double z);

// log(e^a + e^b) without overflow.
double log_add_exp(double a, double b);

struct LinearFit {
    std::vector<double> coef;   // least-squares solution
    double rms = 0.0;           // RMS residual
};

// Least-squares fit of y against the given basis columns (rows = samples).
// Solves the normal equations; intended for <= 4 well-scaled parameters.
LinearFit least_squares(const std::vector<std::vector<double>>& columns,
                        const std::vector<double>& y);

// Slope of the ordinary least-squares line y = a*x + b.
double ols_slope(std::span<const double> x, std::span<const double> y);

// Adaptive Simpson quadrature on [a, b] to relative tolerance tol.
// Returns the estimate; *achieved (optional) reports the error estimate.
// Throws std::runtime_error if the subdivision cap is hit, unless
// `achieved` is provided, in which case the best estimate is returned and
// the failure is visible through *achieved.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48, double* achieved = nullptr);

}  // namespace quench::num

#endif
