// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace quench::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
    throw ScenarioError(pointer + ": " + what);
}

double require_positive(const json& j, const std::string& ptr) {
    if (!j.is_number()) fail(ptr, "expected a number");
    const double v = j.get<double>();
    if (!(v > 0.0)) fail(ptr, "must be > 0");
    return v;
}

Vec3 parse_vec3(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.size() != 3) fail(ptr, "expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

geometry::ParamPatch parse_patch(const json& j, const std::string& ptr, std::string& family,
                                 double& area_hint) {
    family = j.value("family", "");
    if (family == "disk") {
        const double radius = require_positive(j.at("radius"), ptr + "/radius");
        area_hint = std::numbers::pi * radius * radius;
        return geometry::make_disk_patch(parse_vec3(j.at("center"), ptr + "/center"),
                                         parse_vec3(j.at("normal"), ptr + "/normal"), radius);
    }
    if (family == "rect") {
        const double l1 = require_positive(j.at("len1"), ptr + "/len1");
        const double l2 = require_positive(j.at("len2"), ptr + "/len2");
        area_hint = l1 * l2;
        return geometry::make_rect_patch(parse_vec3(j.at("origin"), ptr + "/origin"),
                                         parse_vec3(j.at("e1"), ptr + "/e1"),
                                         parse_vec3(j.at("e2"), ptr + "/e2"), l1, l2);
    }
    if (family == "disk_segment") {
        const double radius = require_positive(j.at("radius"), ptr + "/radius");
        const double x_min = j.at("x_min").get<double>();
        // circular segment area
        area_hint = radius * radius * std::acos(x_min / radius) -
                    x_min * std::sqrt(radius * radius - x_min * x_min);
        return geometry::make_disk_segment_patch(parse_vec3(j.at("center"), ptr + "/center"),
                                                 parse_vec3(j.at("normal"), ptr + "/normal"),
                                                 radius, x_min);
    }
    if (family == "spherical_cap") {
        const double R = require_positive(j.at("sphere_radius"), ptr + "/sphere_radius");
        const double half = require_positive(j.at("half_angle"), ptr + "/half_angle");
        area_hint = 2.0 * std::numbers::pi * R * R * (1.0 - std::cos(half));
        return geometry::make_spherical_cap_patch(
            parse_vec3(j.at("sphere_center"), ptr + "/sphere_center"),
            parse_vec3(j.at("axis"), ptr + "/axis"), R, half);
    }
    if (family == "point") {
        area_hint = 0.0;
        return geometry::make_point_patch(parse_vec3(j.at("point"), ptr + "/point"),
                                          j.contains("normal")
                                              ? parse_vec3(j.at("normal"), ptr + "/normal")
                                              : Vec3{0, 0, 1});
    }
    fail(ptr + "/family", "unknown patch family '" + family +
                              "' (disk, rect, disk_segment, spherical_cap, point, none)");
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double Scenario::source_t_rise(double d_guess) const {
    if (source.t_rise) return *source.t_rise;
    return 0.1 * d_guess;
}

double Scenario::time_step(double d_guess) const {
    if (dt) return *dt;
    if (patch) return source_t_rise(d_guess) / 8.0;
    return observation_time(d_guess) / 400.0;
}

double Scenario::observation_time(double d_guess) const {
    if (t_final) return *t_final;
    return 2.0 * d_guess;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(origin + ": JSON parse error at byte " + std::to_string(e.byte) +
                            ": " + e.what());
    }

    Scenario sc;
    sc.raw_hash = fnv1a_hex(text);
    sc.schema_version = j.value("schema_version", 0);
    if (sc.schema_version != 1) fail("/schema_version", "expected 1");
    sc.name = j.value("name", "unnamed");
    if (j.contains("c2")) sc.c2 = require_positive(j["c2"], "/c2");

    if (j.contains("patch") && !(j["patch"].is_string() && j["patch"] == "none")) {
        if (j["patch"].value("family", "none") != "none")
            sc.patch = parse_patch(j["patch"], "/patch", sc.patch_family, sc.patch_area_hint);
    }

    if (j.contains("source")) {
        const auto& s = j["source"];
        if (s.contains("mu")) {
            sc.source.mu = s["mu"].get<double>();
            if (sc.source.mu < 0.0) fail("/source/mu", "must be >= 0");
        }
        sc.source.amplitude = s.value("amplitude", "constant");
        if (sc.source.amplitude != "constant" && sc.source.amplitude != "radial_bump")
            fail("/source/amplitude", "unknown amplitude shape");
        if (s.contains("t_rise")) sc.source.t_rise = require_positive(s["t_rise"], "/source/t_rise");
    }

    if (j.contains("boundary")) {
        const auto& b = j["boundary"];
        sc.boundary.f_value = b.value("f_value", 1.0);
        sc.boundary.g_value = b.value("g_value", -1.0);
        sc.boundary.f_shape = b.value("f_shape", "constant");
        sc.boundary.g_shape = b.value("g_shape", "constant");
        for (const auto* shape : {&sc.boundary.f_shape, &sc.boundary.g_shape})
            if (*shape != "constant" && *shape != "ramp")
                fail("/boundary", "shape must be 'constant' or 'ramp'");
        if (b.contains("mu")) sc.boundary.mu = require_positive(b["mu"], "/boundary/mu");
        sc.boundary.M = b.value("M", 0.0);
    }

    if (!j.contains("detectors") || !j["detectors"].is_array() || j["detectors"].empty())
        fail("/detectors", "need at least one detector");
    for (std::size_t i = 0; i < j["detectors"].size(); ++i) {
        const std::string ptr = "/detectors/" + std::to_string(i);
        const auto& d = j["detectors"][i];
        geometry::DetectorBall ball;
        ball.center = parse_vec3(d.at("center"), ptr + "/center");
        ball.radius = require_positive(d.at("radius"), ptr + "/radius");
        sc.detectors.push_back(ball);
    }

    // Times in the scenario are physical seconds; c2 (normalized wave speed,
    // distance per second) converts them to the internal unit where the
    // wave speed is 1 and times are lengths.
    if (j.contains("time")) {
        const auto& t = j["time"];
        if (t.contains("dt")) sc.dt = require_positive(t["dt"], "/time/dt") * sc.c2;
        if (t.contains("t_final"))
            sc.t_final = require_positive(t["t_final"], "/time/t_final") * sc.c2;
    }
    if (sc.source.t_rise) sc.source.t_rise = *sc.source.t_rise * sc.c2;

    if (j.contains("ladder")) {
        indicator::LadderSpec ls;
        ls.tau_min = require_positive(j["ladder"].at("tau_min"), "/ladder/tau_min");
        ls.tau_max = require_positive(j["ladder"].at("tau_max"), "/ladder/tau_max");
        ls.count = j["ladder"].value("count", 8);
        if (ls.count < 1) fail("/ladder/count", "must be >= 1");
        if (ls.tau_max < ls.tau_min) fail("/ladder", "tau_max must be >= tau_min");
        sc.ladder = ls;
    }

    if (j.contains("grids")) {
        const auto& g = j["grids"];
        if (g.contains("gamma")) {
            if (!g["gamma"].is_array() || g["gamma"].size() != 2)
                fail("/grids/gamma", "expected [n_s, n_t]");
            sc.gamma_grid_s = g["gamma"][0].get<int>();
            sc.gamma_grid_t = g["gamma"][1].get<int>();
            if (sc.gamma_grid_s < 1 || sc.gamma_grid_t < 1)
                fail("/grids/gamma", "grid sizes must be >= 1");
        }
        if (g.contains("n_theta")) {
            sc.n_theta = g["n_theta"].get<int>();
            if (sc.n_theta < 2) fail("/grids/n_theta", "must be >= 2");
        }
    }

    if (j.contains("size_bound")) {
        SizeBoundSpec sb;
        const auto& s = j["size_bound"];
        sb.M = s.value("M", 0.0);
        sb.alpha_or_beta = s.value("alpha_or_beta", 0.0);
        sb.dist_far = s.value("dist_far", 0.0);
        sb.disk_model = s.value("disk_model", false);
        sc.size_bound = sb;
    }

    sc.mesh_path = j.value("mesh", "");
    sc.seed = j.value("seed", 1ull);

    // Geometry validation: patch immersion/injectivity, detector
    // disjointness, mesh disjointness, underflow budget.
    if (sc.patch) {
        sc.patch->validate();
        for (std::size_t i = 0; i < sc.detectors.size(); ++i) {
            geometry::DistanceResult d;
            try {
                d = geometry::set_distance(*sc.patch, sc.detectors[i]);
            } catch (const std::runtime_error& e) {
                fail("/detectors/" + std::to_string(i), e.what());
            }
            sc.detector_distances.push_back(d.distance);
        }
    }
    if (!sc.mesh_path.empty()) {
        // Resolve relative to the scenario file location when possible.
        std::string path = sc.mesh_path;
        if (origin != "<memory>" && !path.empty() && path[0] != '/') {
            const auto slash = origin.rfind('/');
            if (slash != std::string::npos) path = origin.substr(0, slash + 1) + path;
        }
        geometry::TriMesh mesh = geometry::load_mesh(path);
        sc.mesh_path = path;
        for (std::size_t i = 0; i < sc.detectors.size(); ++i) {
            if (geometry::point_mesh_distance(mesh, sc.detectors[i].center) <
                sc.detectors[i].radius)
                fail("/detectors/" + std::to_string(i),
                     "detector ball touches the cavity mesh");
            // Occlusion is a warning, not an error: the distance readout
            // assumes a straight line of sight from the quench to the
            // detector. The closest-point ray is checked against the mesh
            // with a small offset so a patch lying on the mesh itself does
            // not self-occlude.
            if (sc.patch) {
                const auto d = geometry::set_distance(*sc.patch, sc.detectors[i]);
                const Vec3 argmin = sc.patch->map(d.s, d.t);
                const Vec3 dir = (sc.detectors[i].center - argmin).normalized();
                const Vec3 start = argmin + dir * (1e-3 * d.distance);
                if (geometry::segment_intersects_mesh(mesh, start, sc.detectors[i].center))
                    std::cerr << "[scenario] warning: cavity mesh occludes the line of sight "
                                 "from the patch to detector "
                              << i << "; straight-path distances will be underestimates\n";
            }
        }
    }
    if (sc.ladder && sc.patch) {
        const double d_max =
            *std::max_element(sc.detector_distances.begin(), sc.detector_distances.end());
        if (sc.ladder->tau_max * d_max > 600.0)
            fail("/ladder/tau_max",
                 "tau_max * d exceeds the underflow budget (need tau*d <= 600)");
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

}  // namespace quench::scenario
