// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "quenchloc/numerics.hpp"

namespace quench::inversion {

DistanceFit extract_distance(const indicator::IndicatorCurve& curve, FitModel model) {
    const auto& pts = curve.points;
    if (pts.size() < 4)
        throw std::invalid_argument("extract_distance: need at least 4 ladder points");
    int sign = 0;
    for (const auto& p : pts) {
        if (p.sign == 0)
            throw std::invalid_argument("extract_distance: zero indicator value in the window");
        if (sign == 0) sign = p.sign;
        if (p.sign != sign)
            throw std::invalid_argument(
                "extract_distance: inconsistent signs across the window; refine the quadrature "
                "or shift the tau ladder");
    }

    const std::size_t n = pts.size();
    std::vector<double> col_tau(n), col_log(n), col_one(n, 1.0), y(n);
    for (std::size_t k = 0; k < n; ++k) {
        col_tau[k] = -pts[k].tau;
        col_log[k] = -std::log(pts[k].tau);
        y[k] = pts[k].log_abs;
    }

    std::vector<std::vector<double>> cols;
    cols.push_back(col_tau);
    if (model == FitModel::slope_log) cols.push_back(col_log);
    cols.push_back(col_one);
    const num::LinearFit ls = num::least_squares(cols, y);

    DistanceFit fit;
    fit.model = model;
    fit.distance = ls.coef[0];
    fit.gamma = model == FitModel::slope_log ? ls.coef[1] : 0.0;
    fit.intercept = ls.coef.back();
    fit.rms = ls.rms;
    fit.tau_lo = pts.front().tau;
    fit.tau_hi = pts.back().tau;
    if (fit.distance < 0.0) {
        fit.degenerate = true;
        fit.distance = 0.0;
    }
    return fit;
}

const char* to_string(Presence p) {
    switch (p) {
        case Presence::present: return "present";
        case Presence::absent: return "absent";
        case Presence::inconclusive: return "inconclusive";
    }
    return "?";
}

PresenceVerdict presence_test(const indicator::IndicatorCurve& curve, double t_final,
                              double noise_floor_rel, double margin_frac) {
    PresenceVerdict out;
    out.t_final = t_final;
    out.margin = margin_frac * t_final;

    if (curve.points.empty() || curve.all_zero()) {
        out.verdict = Presence::absent;
        return out;
    }
    double max_abs = 0.0;
    for (const auto& p : curve.points) max_abs = std::max(max_abs, std::abs(p.value));
    const double floor = noise_floor_rel * max_abs;

    std::vector<double> taus, logs;
    int sign = 0;
    bool mixed = false;
    for (const auto& p : curve.points) {
        if (p.sign == 0 || std::abs(p.value) < floor) continue;
        if (sign == 0) sign = p.sign;
        if (p.sign != sign) mixed = true;
        taus.push_back(p.tau);
        logs.push_back(p.log_abs);
    }
    if (taus.size() < 2) {
        out.verdict = Presence::absent;
        return out;
    }
    if (mixed) {
        out.verdict = Presence::inconclusive;
        return out;
    }

    // decay rate of |I|: log|I| ~ -d tau  =>  e^{tau T0} I ~ e^{tau (T0 - d)}
    const double slope = num::ols_slope(taus, logs);
    out.evidence_distance = -slope;
    if (out.evidence_distance < t_final - out.margin)
        out.verdict = Presence::present;
    else if (out.evidence_distance > t_final + out.margin)
        out.verdict = Presence::absent;
    else
        out.verdict = Presence::inconclusive;
    return out;
}

SizeBound size_lower_bound(const indicator::IndicatorCurve& curve, const DistanceFit& fit,
                           const SizeBoundParams& params) {
    if (!(params.norm_cap_M > 0.0) || !(params.alpha_or_beta > 0.0) ||
        !(params.dist_far > 0.0) || !(params.detector_radius > 0.0))
        throw std::invalid_argument("size_lower_bound: parameters must be positive");
    if (!(fit.distance > 0.0))
        throw std::invalid_argument("size_lower_bound: need a positive fitted distance");

    SizeBound out;
    // c0 = (M m(S^2) / (4 sqrt(2) pi)) (alpha v beta)(D_far + 2r)/d
    //    = (M / sqrt(2)) (alpha v beta)(D_far + 2r)/d.
    out.c0 = params.norm_cap_M / std::sqrt(2.0) * params.alpha_or_beta *
             (params.dist_far + 2.0 * params.detector_radius) / fit.distance;

    // The limsup is approximated by the max over the ladder; work in logs
    // since e^{tau d} alone may overflow.
    double best_log = -std::numeric_limits<double>::infinity();
    for (const auto& p : curve.points) {
        if (p.sign == 0) continue;
        best_log = std::max(best_log, 0.5 * std::log(p.tau) + p.tau * fit.distance + p.log_abs);
    }
    if (std::isinf(best_log)) {
        out.sup_rescaled = 0.0;
        out.area_lower_bound = 0.0;
        out.disk_radius_lower_bound = 0.0;
        return out;
    }
    out.sup_rescaled = std::exp(best_log);
    const double root = out.sup_rescaled / out.c0;
    out.area_lower_bound = root * root;
    if (params.disk_model)
        out.disk_radius_lower_bound = root / std::sqrt(std::numbers::pi);
    return out;
}

namespace {

double residual_sq(const Vec3& x, const std::vector<DetectorDistance>& det) {
    double s = 0.0;
    for (const auto& d : det) {
        const double misfit = (x - d.center).norm() - d.radius - d.distance;
        s += misfit * misfit;
    }
    return s;
}

}  // namespace

TriangulationResult triangulate(const geometry::TriMesh& mesh,
                                const std::vector<DetectorDistance>& detectors) {
    if (detectors.size() < 3)
        throw std::invalid_argument("triangulate: need at least 3 detectors");
    if (mesh.vertices.empty()) throw std::invalid_argument("triangulate: empty mesh");

    // Vertex scan; lowest index wins ties.
    std::uint32_t best_v = 0;
    double best_r2 = std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < mesh.vertices.size(); ++i) {
        const double r2 = residual_sq(mesh.vertices[i], detectors);
        if (r2 < best_r2) {
            best_r2 = r2;
            best_v = i;
        }
    }

    // Ambiguity: another vertex, well separated from the best one, matching
    // almost as well (symmetric configurations).
    TriangulationResult out;
    const double sep = 4.0 * mesh.mean_edge_length();
    const double r_best = std::sqrt(best_r2 / detectors.size());
    for (std::uint32_t i = 0; i < mesh.vertices.size(); ++i) {
        if ((mesh.vertices[i] - mesh.vertices[best_v]).norm() < sep) continue;
        const double r_i = std::sqrt(residual_sq(mesh.vertices[i], detectors) / detectors.size());
        const double scale = std::max(r_best, 1e-12 * (1.0 + mesh.mean_edge_length()));
        if (r_i <= r_best + 1e-6 * scale || (r_best > 0 && r_i / r_best < 1.0 + 1e-6)) {
            out.ambiguous = true;
            break;
        }
    }

    // Refine inside the incident triangles by nested barycentric sampling.
    Vec3 best_x = mesh.vertices[best_v];
    for (const auto& t : mesh.triangles) {
        if (t[0] != best_v && t[1] != best_v && t[2] != best_v) continue;
        const Vec3 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
        double u0 = 0, v0 = 0, span = 1.0;
        if (t[1] == best_v) u0 = 1.0;
        if (t[2] == best_v) v0 = 1.0;
        for (int level = 0; level < 10; ++level) {
            double bu = u0, bv = v0, br = residual_sq(a + (b - a) * u0 + (c - a) * v0, detectors);
            constexpr int kSub = 6;
            for (int i = 0; i <= kSub; ++i) {
                for (int j = 0; j + i <= kSub; ++j) {
                    const double u = std::clamp(u0 + span * (i - kSub / 2) / kSub, 0.0, 1.0);
                    const double v = std::clamp(v0 + span * (j - kSub / 2) / kSub, 0.0, 1.0);
                    if (u + v > 1.0) continue;
                    const double r2 = residual_sq(a + (b - a) * u + (c - a) * v, detectors);
                    if (r2 < br) {
                        br = r2;
                        bu = u;
                        bv = v;
                    }
                }
            }
            u0 = bu;
            v0 = bv;
            span *= 0.5;
        }
        const Vec3 cand = a + (b - a) * u0 + (c - a) * v0;
        if (residual_sq(cand, detectors) < residual_sq(best_x, detectors)) best_x = cand;
    }

    out.point = best_x;
    out.nearest_vertex = best_v;
    out.per_detector_residuals.reserve(detectors.size());
    for (const auto& d : detectors)
        out.per_detector_residuals.push_back((best_x - d.center).norm() - d.radius - d.distance);
    out.rms_residual = std::sqrt(residual_sq(best_x, detectors) / detectors.size());

    double mean_d = 0.0;
    for (const auto& d : detectors) mean_d += d.distance;
    mean_d /= static_cast<double>(detectors.size());
    if (mean_d > 0.0 && out.rms_residual > 0.1 * mean_d)
        std::fprintf(stderr,
                     "[triangulate] warning: residual %.3g exceeds 10%% of the mean distance "
                     "%.3g (inconsistent distances?)\n",
                     out.rms_residual, mean_d);
    return out;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::ordered_json json_double(double v) {
    // Serialize through a fixed %.17g representation so reports are
    // byte-identical across runs and platforms with the same doubles.
    return nlohmann::ordered_json::parse(fmt_double(v));
}

nlohmann::ordered_json json_vec(const Vec3& v) {
    return nlohmann::ordered_json::array({json_double(v.x), json_double(v.y), json_double(v.z)});
}

}  // namespace

std::string LocalizationReport::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "quenchloc-report";
    j["toolkit_version"] = toolkit_version;
    j["scenario_hash"] = scenario_hash;
    j["unit_scale_c2"] = json_double(unit_scale_c2);

    auto& dets = j["detectors"] = nlohmann::ordered_json::array();
    for (const auto& d : detectors) {
        nlohmann::ordered_json e;
        e["id"] = d.id;
        e["center"] = json_vec(d.center);
        e["radius"] = json_double(d.radius);
        e["curve_csv"] = d.curve_csv;
        if (d.fit) {
            e["distance"] = json_double(d.fit->distance);
            e["distance_time"] =
                json_double(unit_scale_c2 > 0 ? d.fit->distance / unit_scale_c2 : 0.0);
            e["gamma"] = json_double(d.fit->gamma);
            e["intercept"] = json_double(d.fit->intercept);
            e["fit_rms"] = json_double(d.fit->rms);
            e["fit_window"] = {json_double(d.fit->tau_lo), json_double(d.fit->tau_hi)};
            e["fit_model"] = d.fit->model == FitModel::slope_log ? "slope-log" : "pure-slope";
            e["fit_degenerate"] = d.fit->degenerate;
        }
        e["presence"] = to_string(d.presence.verdict);
        e["presence_evidence_distance"] = json_double(d.presence.evidence_distance);
        e["presence_margin"] = json_double(d.presence.margin);
        if (d.size) {
            e["size_sup_rescaled"] = json_double(d.size->sup_rescaled);
            e["size_c0"] = json_double(d.size->c0);
            e["size_area_lower_bound"] = json_double(d.size->area_lower_bound);
            if (d.size->disk_radius_lower_bound > 0.0)
                e["size_disk_radius_lower_bound"] = json_double(d.size->disk_radius_lower_bound);
        }
        dets.push_back(std::move(e));
    }

    if (triangulation) {
        nlohmann::ordered_json t;
        t["point"] = json_vec(triangulation->point);
        t["rms_residual"] = json_double(triangulation->rms_residual);
        t["nearest_vertex"] = triangulation->nearest_vertex;
        t["ambiguous"] = triangulation->ambiguous;
        auto& rr = t["per_detector_residuals"] = nlohmann::ordered_json::array();
        for (double r : triangulation->per_detector_residuals) rr.push_back(json_double(r));
        j["triangulation"] = std::move(t);
    }
    if (!triangulation_note.empty()) j["triangulation_note"] = triangulation_note;
    return j.dump(2) + "\n";
}

void LocalizationReport::write_json(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("LocalizationReport: cannot open " + path);
    out << to_json();
}

std::string LocalizationReport::summary_table() const {
    std::ostringstream os;
    os << "detector        d_hat      gamma     presence      area>=\n";
    for (const auto& d : detectors) {
        char line[160];
        std::snprintf(line, sizeof line, "%-12s %9s %10s  %-12s %9s\n", d.id.c_str(),
                      d.fit ? fmt_double(d.fit->distance).substr(0, 9).c_str() : "-",
                      d.fit ? fmt_double(d.fit->gamma).substr(0, 9).c_str() : "-",
                      to_string(d.presence.verdict),
                      d.size ? fmt_double(d.size->area_lower_bound).substr(0, 9).c_str() : "-");
        os << line;
    }
    if (triangulation) {
        os << "triangulated point: (" << fmt_double(triangulation->point.x) << ", "
           << fmt_double(triangulation->point.y) << ", " << fmt_double(triangulation->point.z)
           << ")  rms residual " << fmt_double(triangulation->rms_residual) << "\n";
    } else if (!triangulation_note.empty()) {
        os << "triangulation: " << triangulation_note << "\n";
    }
    return os.str();
}

}  // namespace quench::inversion
