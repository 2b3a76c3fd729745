// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "quenchloc/asymptotics.hpp"
#include "quenchloc/numerics.hpp"
#include "quenchloc/potentials.hpp"
#include "quenchloc/version.hpp"

namespace quench::pipeline {

namespace fs = std::filesystem;

namespace {

std::string det_stem(const Options& opt, std::size_t i) {
    return (fs::path(opt.out_dir) / ("det" + std::to_string(i))).string();
}

double min_distance(const scenario::Scenario& sc) {
    if (sc.detector_distances.empty()) return 0.0;
    return *std::min_element(sc.detector_distances.begin(), sc.detector_distances.end());
}

double max_distance(const scenario::Scenario& sc) {
    if (sc.detector_distances.empty()) return 0.0;
    return *std::max_element(sc.detector_distances.begin(), sc.detector_distances.end());
}

forward::BoundaryData make_boundary_data(const scenario::Scenario& sc) {
    const auto& b = sc.boundary;
    forward::BoundaryData bd;
    bd.mu = b.mu;
    const double fv = b.f_value, gv = b.g_value;
    bd.f = b.f_shape == "ramp" ? std::function<double(double, double, double)>(
                                     [fv](double, double, double time) { return fv + time; })
                               : [fv](double, double, double) { return fv; };
    bd.g = b.g_shape == "ramp" ? std::function<double(double, double, double)>(
                                     [gv](double, double, double time) { return gv - time; })
                               : [gv](double, double, double) { return gv; };
    return bd;
}

// Discrete L2(0,T0; L2(Gamma)) norm of a sampled profile (trapezoid in time).
double profile_norm(const std::vector<std::vector<double>>& field,
                    const geometry::PatchGrid& grid, double dt) {
    double total = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        double tsum = 0.0;
        for (std::size_t k = 0; k < field[i].size(); ++k) {
            const double w = (k == 0 || k + 1 == field[i].size()) ? 0.5 : 1.0;
            tsum += w * field[i][k] * field[i][k];
        }
        total += grid.weights[i] * tsum * dt;
    }
    return std::sqrt(total);
}

indicator::LadderSpec resolve_ladder(const scenario::Scenario& sc, const Options& opt,
                                     double d_guess) {
    indicator::LadderSpec ladder;
    if (opt.ladder_override)
        ladder = *opt.ladder_override;
    else if (sc.ladder)
        ladder = *sc.ladder;
    else if (d_guess > 0.0)
        ladder = indicator::LadderSpec::auto_from_distance(d_guess);
    else
        ladder = indicator::LadderSpec{1.0, 10.0, 8};
    if (d_guess > 0.0 && ladder.tau_max * d_guess > 600.0)
        throw scenario::ScenarioError(
            "ladder: tau_max * d exceeds the underflow budget (tau*d <= 600)");
    return ladder;
}

}  // namespace

forward::DiscreteSource build_source(const scenario::Scenario& sc, double d_guess) {
    if (!sc.patch) {
        forward::DiscreteSource empty;
        empty.profile = forward::make_smoothstep_profile(0.0, 1.0);
        return empty;
    }
    forward::SourceDensity density;
    density.patch = *sc.patch;
    density.mu = sc.source.mu;
    density.grid_s = sc.gamma_grid_s;
    density.grid_t = sc.gamma_grid_t;
    const double mu = sc.source.mu;
    if (sc.source.amplitude == "radial_bump") {
        // mu * (1 + bump) over the parameter rectangle; stays >= mu.
        const double sa = sc.patch->s_a, sspan = sc.patch->span_s();
        const double ta = sc.patch->t_a, tspan = sc.patch->span_t();
        density.amplitude = [mu, sa, sspan, ta, tspan](double s, double t) {
            const double us = sspan > 0 ? (s - sa) / sspan : 0.0;
            const double ut = tspan > 0 ? (t - ta) / tspan : 0.0;
            const double bump = std::sin(std::numbers::pi * us) * std::sin(std::numbers::pi * ut);
            return mu * (1.0 + bump * bump);
        };
    } else {
        density.amplitude = [mu](double, double) { return mu; };
    }
    const double t_rise = sc.source_t_rise(d_guess);
    density.profile = forward::make_smoothstep_profile(mu > 0.0 ? mu : 1.0, t_rise);
    if (mu == 0.0) {
        // zero-density test override: keep the profile but null the weights
        density.amplitude = [](double, double) { return 0.0; };
        density.mu = 0.0;
    }
    return forward::DiscreteSource::build(density);
}

std::vector<std::string> run_simulate(const scenario::Scenario& sc, const Options& opt) {
    fs::create_directories(opt.out_dir);
    const double d_near = min_distance(sc);
    const double d_far = max_distance(sc);
    if (!sc.patch && !sc.t_final)
        throw scenario::ScenarioError("/time/t_final: required for a quench-free scenario");

    const double t_final = sc.observation_time(d_far);
    const double dt = sc.time_step(d_near > 0 ? d_near : t_final / 2.0);
    const forward::DiscreteSource source = build_source(sc, d_near);

    forward::SynthOptions synth_opt;
    synth_opt.n_theta = sc.n_theta;
    synth_opt.warn_to_stderr = !opt.quiet;

    std::vector<std::string> stems;
    for (std::size_t i = 0; i < sc.detectors.size(); ++i) {
        const auto rec = forward::synth_measurement(source, sc.detectors[i], dt, t_final,
                                                    synth_opt);
        const std::string stem = det_stem(opt, i);
        forward::write_measurement(rec, stem);
        stems.push_back(stem);
        if (!opt.quiet)
            std::cout << "simulate: detector " << i << " -> " << stem << "_{u,dnu}.csv ("
                      << rec.nodes.size() << " nodes, " << rec.times.size() << " steps)\n";
    }
    return stems;
}

std::vector<indicator::IndicatorCurve> run_indicator(const scenario::Scenario& sc,
                                                     const Options& opt, bool gamma_side) {
    fs::create_directories(opt.out_dir);
    std::vector<indicator::IndicatorCurve> curves;

    if (gamma_side) {
        if (!sc.patch)
            throw scenario::ScenarioError("gamma-side indicator requires a patch in the scenario");
        const double d_near = min_distance(sc);
        const double t_final = sc.observation_time(max_distance(sc));
        const double dt = sc.time_step(d_near);
        const auto grid = geometry::make_patch_grid(*sc.patch, sc.gamma_grid_s, sc.gamma_grid_t);
        const auto profiles = forward::boundary_profiles(make_boundary_data(sc), grid, dt,
                                                         t_final);
        for (std::size_t i = 0; i < sc.detectors.size(); ++i) {
            const auto ladder = resolve_ladder(sc, opt, sc.detector_distances[i]);
            auto curve = indicator::indicator_curve_gamma(profiles, grid, sc.detectors[i], ladder);
            curve.write_csv(det_stem(opt, i) + "_curve_gamma.csv");
            curves.push_back(std::move(curve));
        }
        return curves;
    }

    for (std::size_t i = 0; i < sc.detectors.size(); ++i) {
        const std::string stem = det_stem(opt, i);
        const auto rec = forward::read_measurement(stem);
        const double arrival = rec.first_arrival();
        const double d_guess = std::isfinite(arrival)
                                   ? arrival
                                   : (sc.patch ? sc.detector_distances[i] : 0.0);
        const auto ladder = resolve_ladder(sc, opt, d_guess);
        auto curve = indicator::indicator_curve_measurement(rec, ladder);
        curve.write_csv(stem + "_curve_measurement.csv");
        curves.push_back(std::move(curve));
    }
    return curves;
}

inversion::LocalizationReport run_invert(const scenario::Scenario& sc, const Options& opt) {
    inversion::LocalizationReport report;
    report.unit_scale_c2 = sc.c2;
    report.scenario_hash = sc.raw_hash;
    report.toolkit_version = kVersion;

    // Size-bound parameters: explicit scenario values, or geometry-derived
    // when the patch is known (validation mode).
    std::optional<inversion::SizeBoundParams> size_params;
    std::optional<geometry::PatchGrid> patch_grid;
    if (sc.patch)
        patch_grid = geometry::make_patch_grid(*sc.patch, sc.gamma_grid_s, sc.gamma_grid_t);

    std::vector<inversion::DetectorDistance> tri_inputs;
    for (std::size_t i = 0; i < sc.detectors.size(); ++i) {
        const std::string stem = det_stem(opt, i);
        const auto rec = forward::read_measurement(stem);
        const double arrival = rec.first_arrival();
        const double d_guess = std::isfinite(arrival)
                                   ? arrival
                                   : (sc.patch && !sc.detector_distances.empty()
                                          ? sc.detector_distances[i]
                                          : 0.0);

        inversion::DetectorReport det;
        det.id = "det" + std::to_string(i);
        det.center = sc.detectors[i].center;
        det.radius = sc.detectors[i].radius;

        const auto ladder = resolve_ladder(sc, opt, d_guess);
        auto curve = indicator::indicator_curve_measurement(rec, ladder);
        const std::string curve_path = stem + "_curve_measurement.csv";
        curve.write_csv(curve_path);
        det.curve_csv = fs::path(curve_path).filename().string();

        det.presence = inversion::presence_test(curve, rec.t_final);

        if (!curve.all_zero()) {
            try {
                const auto fit = inversion::extract_distance(curve, opt.model);
                det.fit = fit;

                // plotting CSV: data series and fitted overlay
                std::ofstream fit_csv(stem + "_fit.csv");
                fit_csv << "tau,log_abs,log_fit\n";
                char buf[120];
                for (const auto& pt : curve.points) {
                    if (pt.sign == 0) continue;
                    const double pred = -fit.distance * pt.tau -
                                        fit.gamma * std::log(pt.tau) + fit.intercept;
                    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pt.tau, pt.log_abs,
                                  pred);
                    fit_csv << buf;
                }

                if (sc.size_bound && fit.distance > 0.0) {
                    inversion::SizeBoundParams params;
                    params.detector_radius = sc.detectors[i].radius;
                    params.norm_cap_M = sc.size_bound->M;
                    params.alpha_or_beta = sc.size_bound->alpha_or_beta;
                    params.dist_far = sc.size_bound->dist_far;
                    params.disk_model = sc.size_bound->disk_model;
                    if (params.alpha_or_beta <= 0.0 && sc.patch) {
                        const auto ab = geometry::alpha_beta(*sc.patch, sc.detectors[i],
                                                             sc.gamma_grid_s, sc.gamma_grid_t);
                        params.alpha_or_beta = std::max(ab.alpha, ab.beta);
                    }
                    if (params.dist_far <= 0.0 && patch_grid) {
                        double far = 0.0;
                        for (const auto& x : patch_grid->points)
                            far = std::max(far, (x - sc.detectors[i].center).norm() -
                                                    sc.detectors[i].radius);
                        params.dist_far = far;
                    }
                    if (params.norm_cap_M <= 0.0 && patch_grid) {
                        const double t_final = rec.t_final;
                        const double dt = rec.dt;
                        const auto profiles = forward::boundary_profiles(
                            make_boundary_data(sc), *patch_grid, dt, t_final);
                        params.norm_cap_M =
                            std::max(profile_norm(profiles.f, *patch_grid, dt),
                                     profile_norm(profiles.g, *patch_grid, dt));
                    }
                    if (params.norm_cap_M > 0.0 && params.alpha_or_beta > 0.0 &&
                        params.dist_far > 0.0)
                        det.size = inversion::size_lower_bound(curve, fit, params);
                }
            } catch (const std::invalid_argument& e) {
                if (!opt.quiet)
                    std::cerr << "invert: detector " << i << ": " << e.what() << "\n";
            }
        }

        if (det.fit && !det.fit->degenerate)
            tri_inputs.push_back({sc.detectors[i].center, sc.detectors[i].radius,
                                  det.fit->distance});
        report.detectors.push_back(std::move(det));
    }

    if (tri_inputs.size() >= 3 && !sc.mesh_path.empty()) {
        const auto mesh = geometry::load_mesh(sc.mesh_path);
        report.triangulation = inversion::triangulate(mesh, tri_inputs);
    } else if (sc.mesh_path.empty()) {
        report.triangulation_note = "skipped (no cavity mesh in the scenario)";
    } else {
        report.triangulation_note = "skipped (need >= 3 detectors with distance fits, have " +
                                    std::to_string(tri_inputs.size()) + ")";
    }

    report.write_json((fs::path(opt.out_dir) / "report.json").string());
    if (!opt.quiet) std::cout << report.summary_table();
    return report;
}

inversion::TriangulationResult run_triangulate(const scenario::Scenario& sc, const Options& opt) {
    if (sc.mesh_path.empty())
        throw scenario::ScenarioError("/mesh: required for the triangulate stage");
    const auto report_path = fs::path(opt.out_dir) / "report.json";
    std::ifstream in(report_path);
    if (!in)
        throw std::runtime_error("triangulate: missing " + report_path.string() +
                                 " (run invert first)");
    const nlohmann::json j = nlohmann::json::parse(in);
    std::vector<inversion::DetectorDistance> inputs;
    for (const auto& d : j.at("detectors")) {
        if (!d.contains("distance")) continue;
        inversion::DetectorDistance dd;
        dd.center = {d["center"][0], d["center"][1], d["center"][2]};
        dd.radius = d["radius"];
        dd.distance = d["distance"];
        inputs.push_back(dd);
    }
    const auto mesh = geometry::load_mesh(sc.mesh_path);
    const auto result = inversion::triangulate(mesh, inputs);
    if (!opt.quiet)
        std::cout << "triangulated point: (" << result.point.x << ", " << result.point.y << ", "
                  << result.point.z << "), rms residual " << result.rms_residual << "\n";
    return result;
}

// ---------------------------------------------------------------------------
// Oracle suites
// ---------------------------------------------------------------------------

namespace {

struct OracleTable {
    std::ostream& os;
    std::ofstream* csv = nullptr;
    bool all_pass = true;

    void row(const std::string& name, double got, double want, double tol) {
        const bool pass = std::abs(got - want) <= tol;
        all_pass = all_pass && pass;
        char line[160];
        std::snprintf(line, sizeof line, "  %-44s %13.6e  want %13.6e  tol %8.1e  %s\n",
                      name.c_str(), got, want, tol, pass ? "PASS" : "FAIL");
        os << line;
        if (csv && csv->is_open()) {
            char rec[200];
            std::snprintf(rec, sizeof rec, "%s,%.17g,%.17g,%.3g,%s\n", name.c_str(), got, want,
                          tol, pass ? "pass" : "fail");
            *csv << rec;
        }
    }
};

bool oracle_potentials(std::ostream& os, std::ofstream* csv) {
    OracleTable t{os, csv};
    os << "potentials oracle (closed form vs defining integral)\n";

    // 100 random exterior points spanning tau in [0.1, 50], rho/r in [1.01, 20].
    std::mt19937_64 rng(20240817u);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double worst = 0.0;
    int accepted = 0;
    while (accepted < 100) {
        const double tau = 0.1 * std::pow(500.0, u01(rng));
        const double r = 0.2 + 2.0 * u01(rng);
        const double rho = r * (1.01 + 18.99 * u01(rng));
        if (tau * (rho - r) > 600.0) continue;  // validated underflow envelope
        ++accepted;
        potentials::BallPotential bp{{{0, 0, 0}, r}, tau};
        const Vec3 x{rho, 0, 0};
        const double closed = potentials::v_exterior(x, bp);
        const auto oracle = potentials::v_quadrature_oracle(x, bp, 1e-9);
        worst = std::max(worst, std::abs(closed - oracle.value) / std::abs(oracle.value));
    }
    t.row("max rel err over 100 random exterior pts", worst, 0.0, 1e-6);

    {
        potentials::BallPotential bp{{{0, 0, 0}, 1.0}, 1.0};
        const double got = potentials::v_exterior({2, 0, 0}, bp);
        t.row("v(tau=1, r=1, rho=2)", got, std::exp(-3.0) / 2.0, 1e-12);
        const auto oracle = potentials::v_quadrature_oracle({2, 0, 0}, bp, 1e-10);
        t.row("oracle(tau=1, r=1, rho=2)", oracle.value, std::exp(-3.0) / 2.0, 1e-8);
    }
    {
        // Newtonian limit r^3/(3 rho) as tau -> 0+.
        potentials::BallPotential bp{{{0, 0, 0}, 1.0}, 1e-6};
        const auto oracle = potentials::v_quadrature_oracle({2, 0, 0}, bp, 1e-10);
        t.row("tau->0 limit vs r^3/(3 rho)", oracle.value, 1.0 / 6.0, 1e-6);
    }
    {
        // Continuity of the interior/exterior branches at rho = r.
        for (double tau : {0.5, 3.0, 17.0}) {
            potentials::BallPotential bp{{{0, 0, 0}, 1.3}, tau};
            const double in = potentials::v_interior_rho(1.3, bp);
            const double out = potentials::v_exterior_rho(1.3, bp);
            t.row("interior/exterior match, tau=" + std::to_string(tau).substr(0, 4), in, out,
                  1e-12 * std::abs(out));
        }
    }
    {
        // Gradient vs central finite differences.
        potentials::BallPotential bp{{{0.3, -0.2, 0.1}, 0.9}, 2.5};
        const Vec3 x{2.0, 1.0, -0.5};
        const Vec3 g = potentials::grad_v_exterior(x, bp);
        const double h = 1e-6;
        double worst_g = 0.0;
        const Vec3 exact[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
        const double comps[3] = {g.x, g.y, g.z};
        for (int a = 0; a < 3; ++a) {
            const double fd = (potentials::v_exterior(x + exact[a] * h, bp) -
                               potentials::v_exterior(x - exact[a] * h, bp)) /
                              (2 * h);
            worst_g = std::max(worst_g, std::abs(fd - comps[a]));
        }
        t.row("grad vs finite differences (abs)", worst_g, 0.0, 1e-9);
    }
    return t.all_pass;
}

bool oracle_asymptotics(std::ostream& os, std::ofstream* csv, std::ofstream* ladder_csv) {
    OracleTable t{os, csv};
    os << "asymptotics oracle (Laplace rates)\n";

    asymptotics::LaplaceProblem interior;
    interior.s_a = -1;
    interior.s_b = 1;
    interior.t_a = -1;
    interior.t_b = 1;
    interior.h = [](double s, double u) { return s * s + u * u; };
    interior.k = [](double, double) { return 1.0; };
    interior.h_min = 0.0;

    {
        const auto J = asymptotics::laplace_integral(interior, 100.0, 1e-8);
        t.row("interior: tau*J(100) vs pi", 100.0 * J.value, std::numbers::pi, 1e-3);
    }
    {
        std::vector<std::pair<double, double>> pts;
        for (double tau : {20.0, 40.0, 80.0, 160.0}) {
            const double J = asymptotics::laplace_integral(interior, tau, 1e-8).value;
            pts.emplace_back(tau, J);
            if (ladder_csv && ladder_csv->is_open())
                *ladder_csv << "interior," << tau << ',' << J << ',' << tau * J << "\n";
        }
        t.row("interior rate", asymptotics::rate_estimate(pts, 0.0), -1.0, 0.02);
    }

    asymptotics::LaplaceProblem boundary;
    boundary.s_a = 0;
    boundary.s_b = 1;
    boundary.t_a = -1;
    boundary.t_b = 1;
    boundary.h = [](double s, double u) { return s + u * u; };
    boundary.k = [](double, double) { return 1.0; };
    boundary.h_min = 0.0;

    {
        const auto J = asymptotics::laplace_integral(boundary, 100.0, 1e-8);
        t.row("boundary: tau^{3/2}*J(100) vs sqrt(pi)", std::pow(100.0, 1.5) * J.value,
              std::sqrt(std::numbers::pi), 2e-3);
    }
    {
        std::vector<std::pair<double, double>> pts;
        for (double tau : {20.0, 40.0, 80.0, 160.0}) {
            const double J = asymptotics::laplace_integral(boundary, tau, 1e-8).value;
            pts.emplace_back(tau, J);
            if (ladder_csv && ladder_csv->is_open())
                *ladder_csv << "boundary," << tau << ',' << J << ',' << std::pow(tau, 1.5) * J
                            << "\n";
        }
        t.row("boundary rate", asymptotics::rate_estimate(pts, 0.0), -1.5, 0.03);
    }
    {
        asymptotics::LaplaceProblem flat = interior;
        flat.h = [](double, double) { return 0.0; };
        const auto J = asymptotics::laplace_integral(flat, 7.0, 1e-10);
        t.row("h == 0: J = area", J.value, 4.0, 1e-8);
    }
    return t.all_pass;
}

}  // namespace

bool run_oracle(const std::string& which, std::ostream& os, const std::string& csv_dir) {
    bool ok = true;
    bool matched = false;
    std::ofstream pot_csv, asym_csv, ladder_csv;
    if (!csv_dir.empty()) {
        fs::create_directories(csv_dir);
        pot_csv.open(fs::path(csv_dir) / "oracle_potentials.csv");
        asym_csv.open(fs::path(csv_dir) / "oracle_asymptotics.csv");
        ladder_csv.open(fs::path(csv_dir) / "oracle_rate_ladders.csv");
        pot_csv << "check,value,expected,tolerance,status\n";
        asym_csv << "check,value,expected,tolerance,status\n";
        ladder_csv << "problem,tau,J,rescaled\n";
    }
    if (which == "potentials" || which == "all") {
        ok = oracle_potentials(os, pot_csv.is_open() ? &pot_csv : nullptr) && ok;
        matched = true;
    }
    if (which == "asymptotics" || which == "all") {
        ok = oracle_asymptotics(os, asym_csv.is_open() ? &asym_csv : nullptr,
                                ladder_csv.is_open() ? &ladder_csv : nullptr) && ok;
        matched = true;
    }
    if (!matched)
        throw std::invalid_argument("oracle: unknown suite '" + which +
                                    "' (potentials, asymptotics, all)");
    os << (ok ? "oracle: all checks passed\n" : "oracle: FAILURES above\n");
    return ok;
}

}  // namespace quench::pipeline
