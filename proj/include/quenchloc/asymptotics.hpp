// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_ASYMPTOTICS_HPP
#define QUENCHLOC_ASYMPTOTICS_HPP

#include <functional>
#include <utility>
#include <vector>

namespace quench::asymptotics {

// Laplace-type integral J(tau) = iint_R e^{-tau h(s,t)} k(s,t) ds dt over a
// parameter rectangle. The decay exponent of J e^{tau h_min} separates
// interior nondegenerate minima (-1) from boundary non-critical ones (-3/2).
struct LaplaceProblem {
    double s_a = 0.0, s_b = 1.0;
    double t_a = 0.0, t_b = 1.0;
    std::function<double(double, double)> h;
    std::function<double(double, double)> k;  // positive weight
    double h_min = 0.0;                        // global minimum of h on the rectangle
};

struct LaplaceResult {
    double value = 0.0;          // J(tau); may underflow to 0 for large tau*h_min
    double log_value = 0.0;      // log J(tau), finite whenever the rescaled sum is positive
    double error_estimate = 0.0;
    bool converged = true;
    int cells_used = 0;
};

// Adaptive tensor quadrature. Cells whose offset tau*(h - h_min) exceeds
// ~30 everywhere contribute below e^{-30} relative and are not refined, so
// the active region tracks the Laplace peak and cost stays mild as tau
// grows.
LaplaceResult laplace_integral(const LaplaceProblem& prob, double tau, double tol,
                               int max_cells = 20000);

// Slope of log(J_k e^{tau_k h_min}) against log(tau_k): the algebraic decay
// exponent after the exponential factor is removed.
double rate_estimate(const std::vector<std::pair<double, double>>& tau_J, double h_min);

}  // namespace quench::asymptotics

#endif
