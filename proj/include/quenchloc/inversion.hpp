// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_INVERSION_HPP
#define QUENCHLOC_INVERSION_HPP

#include <optional>
#include <string>
#include <vector>

#include "quenchloc/geometry.hpp"
#include "quenchloc/indicator.hpp"

namespace quench::inversion {

enum class FitModel { pure_slope, slope_log };

// Least-squares fit of log|I_k| = -d tau_k - gamma log(tau_k) + c.
// The -gamma log(tau) term absorbs the unknown polynomial prefactor; the
// pure-slope model pins gamma = 0.
struct DistanceFit {
    double distance = 0.0;      // d_hat (clipped at 0)
    double gamma = 0.0;         // prefactor exponent estimate
    double intercept = 0.0;
    double rms = 0.0;
    double tau_lo = 0.0, tau_hi = 0.0;
    FitModel model = FitModel::slope_log;
    bool degenerate = false;    // raw fit gave d < 0
};

DistanceFit extract_distance(const indicator::IndicatorCurve& curve,
                             FitModel model = FitModel::slope_log);

enum class Presence { present, absent, inconclusive };
const char* to_string(Presence p);

struct PresenceVerdict {
    Presence verdict = Presence::inconclusive;
    double evidence_distance = 0.0;  // pure-slope decay rate of |I|
    double t_final = 0.0;
    double margin = 0.0;             // fraction of T0 used as hysteresis
};

// Trend of log|I_k| + tau_k T0: growing means e^{tau T0} I diverges
// (quench present), shrinking means it vanishes (absent). Curves entirely
// below the noise floor are absent; mixed-sign windows are inconclusive.
PresenceVerdict presence_test(const indicator::IndicatorCurve& curve, double t_final,
                              double noise_floor_rel = 1e-12, double margin_frac = 0.05);

struct SizeBoundParams {
    double norm_cap_M = 0.0;      // a-priori bound on the boundary data norms
    double alpha_or_beta = 0.0;   // max(alpha, beta) visibility bound
    double dist_far = 0.0;        // upper bound on d_e(x0, B) over the patch
    double detector_radius = 0.0;
    bool disk_model = false;      // also report a disk-radius bound
};

struct SizeBound {
    double sup_rescaled = 0.0;    // max_k tau_k^{1/2} e^{tau_k d_hat} |I_k|
    double c0 = 0.0;              // (M/sqrt(2)) (alpha v beta)(D_far + 2r)/d_hat
    double area_lower_bound = 0.0;      // m(Gamma) >= (sup/c0)^2
    double disk_radius_lower_bound = 0.0;  // sup/(c0 sqrt(pi)) when disk_model
};

SizeBound size_lower_bound(const indicator::IndicatorCurve& curve, const DistanceFit& fit,
                           const SizeBoundParams& params);

struct DetectorDistance {
    Vec3 center;
    double radius = 0.0;
    double distance = 0.0;  // d_hat from that detector
};

struct TriangulationResult {
    Vec3 point;
    double rms_residual = 0.0;
    std::vector<double> per_detector_residuals;
    std::uint32_t nearest_vertex = 0;
    bool ambiguous = false;  // a second well-separated near-minimum exists
};

// Least-squares search over the cavity surface: scan mesh vertices for the
// minimizer of sum_i (|x - p_i| - r_i - d_i)^2 (lowest index wins ties),
// then refine inside the incident triangles. A surface search always
// returns a point even when the distance spheres fail to intersect.
TriangulationResult triangulate(const geometry::TriMesh& mesh,
                                const std::vector<DetectorDistance>& detectors);

// ---------------------------------------------------------------------------
// Aggregate report
// ---------------------------------------------------------------------------

struct DetectorReport {
    std::string id;
    Vec3 center;
    double radius = 0.0;
    std::optional<DistanceFit> fit;   // absent when the record carries no signal
    PresenceVerdict presence;
    std::optional<SizeBound> size;
    std::string curve_csv;            // relative path of the exported curve
};

struct LocalizationReport {
    std::vector<DetectorReport> detectors;
    std::optional<TriangulationResult> triangulation;
    std::string triangulation_note;
    double unit_scale_c2 = 1.0;       // second-sound speed used for unit conversion
    std::string scenario_hash;
    std::string toolkit_version;

    std::string to_json() const;      // stable key order and float formatting
    void write_json(const std::string& path) const;
    std::string summary_table() const;
};

}  // namespace quench::inversion

#endif
