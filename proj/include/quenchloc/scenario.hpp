// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_SCENARIO_HPP
#define QUENCHLOC_SCENARIO_HPP

#include <optional>
#include <string>
#include <vector>

#include "quenchloc/forward.hpp"
#include "quenchloc/geometry.hpp"
#include "quenchloc/indicator.hpp"
#include "quenchloc/inversion.hpp"

namespace quench::scenario {

// Validation failures carry the JSON pointer of the offending field.
class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct SourceSpec {
    double mu = 1.0;
    std::string amplitude = "constant";   // constant | radial_bump
    std::optional<double> t_rise;         // default 0.1 * d_e(Gamma, B)
};

struct BoundarySpec {
    double f_value = 1.0;   // constant in time and space
    double g_value = -1.0;
    std::string f_shape = "constant";  // constant | ramp  (ramp: value + time)
    std::string g_shape = "constant";
    double mu = 1.0;
    double M = 0.0;         // 0 = derive from the constant values and T0
};

struct SizeBoundSpec {
    double M = 0.0;               // <= 0: derive from boundary spec
    double alpha_or_beta = 0.0;   // <= 0: compute from geometry
    double dist_far = 0.0;        // <= 0: compute from geometry
    bool disk_model = false;
};

struct Scenario {
    int schema_version = 1;
    std::string name;
    double c2 = 1.0;              // second-sound speed (distance per physical second)

    // Patch: empty optional = quench-free scenario.
    std::optional<geometry::ParamPatch> patch;
    std::string patch_family = "none";
    double patch_area_hint = 0.0;  // analytic area when the family provides one

    SourceSpec source;
    BoundarySpec boundary;
    std::vector<geometry::DetectorBall> detectors;

    std::optional<double> dt;        // default: t_rise/8 (or T0/400 without a source)
    std::optional<double> t_final;   // default: 2x geometric distance estimate
    std::optional<indicator::LadderSpec> ladder;  // default: from d_guess

    int gamma_grid_s = 32, gamma_grid_t = 32;
    int n_theta = 24;

    std::optional<SizeBoundSpec> size_bound;
    std::string mesh_path;           // cavity mesh for triangulation ("" = none)
    std::uint64_t seed = 1;

    std::string raw_hash;            // FNV-1a of the scenario file bytes

    // Geometry-derived quantities (filled by validate_geometry for scenarios
    // with a patch).
    std::vector<double> detector_distances;  // d_e(Gamma, B_i)

    double source_t_rise(double d_guess) const;
    double time_step(double d_guess) const;
    double observation_time(double d_guess) const;
};

// Parse + semantic validation. Errors mention the JSON pointer of the bad
// field; the geometry checks (ball disjoint from patch and mesh, tau*d
// underflow budget) run here too.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<memory>");

std::string fnv1a_hex(const std::string& bytes);

}  // namespace quench::scenario

#endif
