// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_INDICATOR_HPP
#define QUENCHLOC_INDICATOR_HPP

#include <span>
#include <string>
#include <vector>

#include "quenchloc/forward.hpp"
#include "quenchloc/geometry.hpp"
#include "quenchloc/potentials.hpp"

namespace quench::indicator {

// Time-Laplace reduction int_0^{T0} e^{-tau s} u(s) ds of a uniformly
// sampled series, by product integration: exact for the piecewise-linear
// interpolant against e^{-tau s}, for any tau*dt.
double time_laplace(std::span<const double> series, double dt, double tau);

enum class CurveSide { measurement, gamma };

struct IndicatorPoint {
    double tau = 0.0;
    double value = 0.0;        // signed I(tau); may underflow to 0
    double log_abs = 0.0;      // log |I(tau)|, valid when sign != 0
    int sign = 0;              // -1, 0, +1
    bool error_flag = false;   // cancellation-dominated (unreliable near sign changes)
};

struct IndicatorCurve {
    std::vector<IndicatorPoint> points;  // strictly increasing tau
    CurveSide side = CurveSide::measurement;
    double t_final = 0.0;

    bool all_zero() const;
    void validate() const;  // ladder strictly increasing, log consistency

    // CSV: tau,sign,log_abs,value,error_flag
    void write_csv(const std::string& path) const;
    static IndicatorCurve read_csv(const std::string& path);
};

// Surface-side indicator
//   I(tau) = sum_nodes w [ W_tau(x) dnu_v(x) - v(x) (dnu u)_tau(x) ],
// nu outward from B; v, dnu_v from the closed-form ball potential.
IndicatorPoint indicator_measurement(const forward::MeasurementRecord& rec, double tau);

// Quench-side dominant term int_Gamma (f_tau dnu_v - v g_tau) dS with nu
// the patch normal. The neglected remainder carries e^{-tau T0}.
IndicatorPoint indicator_gamma(const forward::BoundaryProfiles& bp,
                               const geometry::PatchGrid& grid,
                               const geometry::DetectorBall& ball, double tau);

struct LadderSpec {
    double tau_min = 0.0;
    double tau_max = 0.0;
    int count = 0;

    std::vector<double> taus() const;  // linear spacing
    // tau_k = tau_min + k dtau with tau_min = 10/d_guess and
    // tau_max*d_guess ~= 40: linear spacing keeps the log|I| slope
    // regression an ordinary least-squares problem.
    static LadderSpec auto_from_distance(double d_guess, int count = 8);
};

IndicatorCurve indicator_curve_measurement(const forward::MeasurementRecord& rec,
                                           const LadderSpec& ladder);
IndicatorCurve indicator_curve_gamma(const forward::BoundaryProfiles& bp,
                                     const geometry::PatchGrid& grid,
                                     const geometry::DetectorBall& ball,
                                     const LadderSpec& ladder);

}  // namespace quench::indicator

#endif
