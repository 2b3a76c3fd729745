// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_FORWARD_HPP
#define QUENCHLOC_FORWARD_HPP

#include <functional>
#include <string>
#include <vector>

#include "quenchloc/geometry.hpp"
#include "quenchloc/vec3.hpp"

namespace quench::forward {

// Temporal source profile q(t) with q(t <= 0) = 0 and closed-form q'.
struct TemporalProfile {
    std::function<double(double)> q;
    std::function<double(double)> dq;
    double t_rise = 0.0;
};

// mu * smooth (C^inf) ramp reaching mu at t = t_rise.
TemporalProfile make_smoothstep_profile(double mu, double t_rise);

// Emission density on the patch: amplitude a(s,t) >= mu > 0 and a shared
// temporal profile. The synthetic field is the retarded single-layer
// potential of this density.
struct SourceDensity {
    geometry::ParamPatch patch;
    std::function<double(double, double)> amplitude;  // a(s,t)
    TemporalProfile profile;
    double mu = 0.0;  // positivity floor; amplitude >= mu enforced on the grid
    int grid_s = 32, grid_t = 32;
};

struct FieldSample {
    double u = 0.0;
    Vec3 grad_u;
    double du_dt = 0.0;
};

// Precomputed quadrature form of the density (nodes, combined weights).
struct DiscreteSource {
    std::vector<Vec3> points;
    std::vector<double> weights;  // quadrature weight times amplitude
    double node_spacing = 0.0;    // max nearest-neighbor gap, for the near-field guard
    TemporalProfile profile;
    double mu = 0.0;

    // mu = 0 test override skips the amplitude floor check.
    static DiscreteSource build(const SourceDensity& src);
};

// Retarded single-layer field
//   u(t,x) = sum_j w_j q(t - rho_j) / (4 pi rho_j),   rho_j = |x - y_j|,
// an exact free-space wave solution for the discrete node set. Throws if x
// is closer to the patch than 3x the node spacing.
FieldSample single_layer_field(const DiscreteSource& src, const Vec3& x, double t);

// Dynamical data sampled on the detector sphere over a uniform time grid.
struct MeasurementRecord {
    geometry::DetectorBall ball;
    std::vector<Vec3> nodes;       // quadrature nodes on dB
    std::vector<double> weights;   // sum = 4 pi r^2
    std::vector<double> times;     // 0 = t_0 < ... < t_N = T0, uniform
    // Row-major [node][time]:
    std::vector<std::vector<double>> u;
    std::vector<std::vector<double>> dnu;  // nu . grad u, nu outward from B
    double dt = 0.0;
    double t_final = 0.0;

    bool all_zero() const;
    double first_arrival() const;  // first time with |u| > 0 anywhere; inf if none
};

// Product Gauss-Legendre in cos(theta) x uniform azimuth on the detector
// sphere; n_phi = 2 n_theta.
struct SphereGrid {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
};
SphereGrid make_sphere_grid(const geometry::DetectorBall& ball, int n_theta);

struct SynthOptions {
    int n_theta = 24;
    bool warn_to_stderr = true;
};

MeasurementRecord synth_measurement(const DiscreteSource& src, const geometry::DetectorBall& ball,
                                    double dt, double t_final, const SynthOptions& opt = {});

// Independently chosen boundary data on the patch (the Cauchy pair of the
// inverse problem): f >= mu, -g >= mu, with discrete norm cap M.
struct BoundaryData {
    std::function<double(double s, double t, double time)> f;
    std::function<double(double s, double t, double time)> g;
    double mu = 0.0;
    double M = 0.0;
    bool enforce_floors = true;
};

struct BoundaryProfiles {
    std::vector<std::vector<double>> f;  // [gamma node][time]
    std::vector<std::vector<double>> g;
    std::vector<double> times;
    double mu = 0.0;
    double M = 0.0;
};

// Samples f, g on the patch grid x time grid; rejects floor violations
// (f < mu or -g < mu at any sample) unless enforce_floors is off.
BoundaryProfiles boundary_profiles(const BoundaryData& bd, const geometry::PatchGrid& grid,
                                   double dt, double t_final);

// CSV + JSON sidecar interchange written by `simulate` and read by
// `indicator`/`invert`. Layout: <stem>_u.csv, <stem>_dnu.csv with header
//   node,x,y,z,weight,u0,u1,...
// one row per node, one column per time step; <stem>_meta.json carries the
// ball, grids and time axis.
void write_measurement(const MeasurementRecord& rec, const std::string& stem);
MeasurementRecord read_measurement(const std::string& stem);

}  // namespace quench::forward

#endif
