// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/forward.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "quenchloc/numerics.hpp"

namespace quench::forward {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;
}  // namespace

namespace {
// C^inf bump-blend step: 0 for x <= 0, 1 for x >= 1, smooth everywhere.
// Infinitely smooth so trailing-edge kinks never degrade the spectral
// accuracy of the surface quadratures.
double step_inf(double x) {
    if (x <= 1e-6) return 0.0;
    if (x >= 1.0 - 1e-6) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}
double dstep_inf(double x) {
    if (x <= 1e-6 || x >= 1.0 - 1e-6) return 0.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    const double denom = (a + b) * (a + b);
    return a * b * (1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x))) / denom;
}
}  // namespace

TemporalProfile make_smoothstep_profile(double mu, double t_rise) {
    if (!(mu >= 0.0) || !(t_rise > 0.0))
        throw std::invalid_argument("make_smoothstep_profile: need mu >= 0, t_rise > 0");
    TemporalProfile p;
    p.t_rise = t_rise;
    p.q = [mu, t_rise](double t) { return mu * step_inf(t / t_rise); };
    p.dq = [mu, t_rise](double t) { return mu * dstep_inf(t / t_rise) / t_rise; };
    return p;
}

DiscreteSource DiscreteSource::build(const SourceDensity& src) {
    if (!src.profile.q || !src.profile.dq)
        throw std::invalid_argument("SourceDensity: temporal profile incomplete");
    if (std::abs(src.profile.q(0.0)) > 0.0)
        throw std::invalid_argument("SourceDensity: q(0) must be 0 (zero initial data)");
    const geometry::PatchGrid grid = geometry::make_patch_grid(src.patch, src.grid_s, src.grid_t);

    DiscreteSource d;
    d.profile = src.profile;
    d.mu = src.mu;
    d.points = grid.points;
    d.weights.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = src.amplitude ? src.amplitude(grid.s[i], grid.t[i]) : src.mu;
        if (src.mu > 0.0 && a < src.mu)
            throw std::invalid_argument("SourceDensity: amplitude below the mu floor");
        d.weights[i] = grid.weights[i] * a;
    }

    // Max nearest-neighbor gap, for the near-singular evaluation guard.
    double spacing = 0.0;
    for (std::size_t i = 0; i < d.points.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < d.points.size(); ++j) {
            if (j == i) continue;
            nearest = std::min(nearest, (d.points[i] - d.points[j]).norm());
        }
        if (d.points.size() > 1) spacing = std::max(spacing, nearest);
    }
    d.node_spacing = spacing;
    return d;
}

FieldSample single_layer_field(const DiscreteSource& src, const Vec3& x, double t) {
    const std::size_t n = src.points.size();
    std::vector<double> us(n), gx(n), gy(n), gz(n), uts(n);
    double rho_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const Vec3 d = x - src.points[j];
        const double rho = d.norm();
        rho_min = std::min(rho_min, rho);
        const double tr = t - rho;
        const double q = src.profile.q(tr);
        const double qd = src.profile.dq(tr);
        const double w = src.weights[j] / kFourPi;
        us[j] = w * q / rho;
        uts[j] = w * qd / rho;
        // grad of q(t-rho)/rho: (-q'/rho - q/rho^2) * d/rho
        const double radial = w * (-qd / rho - q / (rho * rho)) / rho;
        gx[j] = radial * d.x;
        gy[j] = radial * d.y;
        gz[j] = radial * d.z;
    }
    if (rho_min < 3.0 * src.node_spacing)
        throw std::runtime_error("single_layer_field: evaluation point too close to the patch "
                                 "(quadrature unreliable)");
    FieldSample s;
    s.u = num::pairwise_sum(us);
    s.du_dt = num::pairwise_sum(uts);
    s.grad_u = {num::pairwise_sum(gx), num::pairwise_sum(gy), num::pairwise_sum(gz)};
    return s;
}

SphereGrid make_sphere_grid(const geometry::DetectorBall& ball, int n_theta) {
    ball.validate();
    if (n_theta < 2) throw std::invalid_argument("make_sphere_grid: n_theta must be >= 2");
    const int n_phi = 2 * n_theta;
    const auto q = num::gauss_legendre(n_theta, -1.0, 1.0);  // cos(theta)
    SphereGrid g;
    g.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    const double r = ball.radius;
    for (int i = 0; i < n_theta; ++i) {
        const double c = q.nodes[i];
        const double s = std::sqrt(std::max(1.0 - c * c, 0.0));
        for (int j = 0; j < n_phi; ++j) {
            const double phi = 2.0 * kPi * j / n_phi;
            g.nodes.push_back(ball.center +
                              Vec3{r * s * std::cos(phi), r * s * std::sin(phi), r * c});
            g.weights.push_back(r * r * q.weights[i] * (2.0 * kPi / n_phi));
        }
    }
    return g;
}

bool MeasurementRecord::all_zero() const {
    for (const auto& row : u)
        for (double v : row)
            if (v != 0.0) return false;
    for (const auto& row : dnu)
        for (double v : row)
            if (v != 0.0) return false;
    return true;
}

double MeasurementRecord::first_arrival() const {
    for (std::size_t k = 0; k < times.size(); ++k)
        for (const auto& row : u)
            if (row[k] != 0.0) return times[k];
    return std::numeric_limits<double>::infinity();
}

MeasurementRecord synth_measurement(const DiscreteSource& src, const geometry::DetectorBall& ball,
                                    double dt, double t_final, const SynthOptions& opt) {
    ball.validate();
    if (!(dt > 0.0) || !(t_final > dt))
        throw std::invalid_argument("synth_measurement: need 0 < dt < T0");

    MeasurementRecord rec;
    rec.ball = ball;
    rec.dt = dt;
    rec.t_final = t_final;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(t_final / dt));
    rec.times.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) rec.times[k] = dt * static_cast<double>(k);

    SphereGrid grid = make_sphere_grid(ball, opt.n_theta);
    rec.nodes = std::move(grid.nodes);
    rec.weights = std::move(grid.weights);

    double rho_min_all = std::numeric_limits<double>::infinity();
    for (const auto& y : src.points)
        rho_min_all = std::min(rho_min_all, (y - ball.center).norm() - ball.radius);
    if (opt.warn_to_stderr && t_final < rho_min_all)
        std::cerr << "[synth_measurement] warning: T0 = " << t_final
                  << " is below the geometric distance " << rho_min_all
                  << "; no signal will arrive\n";

    rec.u.assign(rec.nodes.size(), std::vector<double>(rec.times.size(), 0.0));
    rec.dnu.assign(rec.nodes.size(), std::vector<double>(rec.times.size(), 0.0));

    const std::size_t nsrc = src.points.size();
    std::vector<double> rho(nsrc), wx(nsrc), wy(nsrc);
    std::vector<double> uterm(nsrc), dterm(nsrc);
    for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
        const Vec3 x = rec.nodes[i];
        const Vec3 nu = (x - ball.center) / ball.radius;
        double rho_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < nsrc; ++j) {
            const Vec3 d = x - src.points[j];
            rho[j] = d.norm();
            rho_min = std::min(rho_min, rho[j]);
            const double along = d.dot(nu);
            wx[j] = src.weights[j] / kFourPi;
            // dnu pieces: (-q'/rho - q/rho^2)(d.nu)/rho
            wy[j] = along / rho[j];
        }
        if (rho_min < 3.0 * src.node_spacing)
            throw std::runtime_error("synth_measurement: detector touches the source patch");
        for (std::size_t k = 0; k < rec.times.size(); ++k) {
            const double t = rec.times[k];
            if (t < rho_min) continue;  // causality: exact zero before first arrival
            for (std::size_t j = 0; j < nsrc; ++j) {
                const double tr = t - rho[j];
                const double q = src.profile.q(tr);
                const double qd = src.profile.dq(tr);
                uterm[j] = wx[j] * q / rho[j];
                dterm[j] = wx[j] * (-qd / rho[j] - q / (rho[j] * rho[j])) * wy[j];
            }
            rec.u[i][k] = num::pairwise_sum(uterm);
            rec.dnu[i][k] = num::pairwise_sum(dterm);
        }
    }
    return rec;
}

BoundaryProfiles boundary_profiles(const BoundaryData& bd, const geometry::PatchGrid& grid,
                                   double dt, double t_final) {
    if (!bd.f || !bd.g) throw std::invalid_argument("boundary_profiles: missing f or g");
    if (!(dt > 0.0) || !(t_final > dt))
        throw std::invalid_argument("boundary_profiles: need 0 < dt < T0");
    BoundaryProfiles out;
    out.mu = bd.mu;
    out.M = bd.M;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(t_final / dt));
    out.times.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) out.times[k] = dt * static_cast<double>(k);

    out.f.assign(grid.size(), std::vector<double>(out.times.size()));
    out.g.assign(grid.size(), std::vector<double>(out.times.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t k = 0; k < out.times.size(); ++k) {
            const double fv = bd.f(grid.s[i], grid.t[i], out.times[k]);
            const double gv = bd.g(grid.s[i], grid.t[i], out.times[k]);
            if (bd.enforce_floors && (fv < bd.mu || -gv < bd.mu))
                throw std::invalid_argument(
                    "boundary_profiles: floor violated (need f >= mu and -g >= mu)");
            out.f[i][k] = fv;
            out.g[i][k] = gv;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interchange format
// ---------------------------------------------------------------------------

namespace {

void write_field_csv(const std::string& path, const MeasurementRecord& rec,
                     const std::vector<std::vector<double>>& field) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_measurement: cannot open " + path);
    out << "node,x,y,z,weight";
    for (std::size_t k = 0; k < rec.times.size(); ++k) out << ",t" << k;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
        out << i;
        const double coords[4] = {rec.nodes[i].x, rec.nodes[i].y, rec.nodes[i].z, rec.weights[i]};
        for (double c : coords) {
            std::snprintf(buf, sizeof buf, "%.17g", c);
            out << ',' << buf;
        }
        for (double v : field[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

std::vector<std::vector<double>> read_field_csv(const std::string& path, MeasurementRecord& rec,
                                                bool fill_geometry) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_measurement: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_measurement: empty file " + path);
    std::vector<std::vector<double>> field;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const auto comma = line.find(',', pos);
            const std::string tok =
                line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            row.push_back(std::stod(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (row.size() < 6) throw std::runtime_error("read_measurement: short row in " + path);
        if (fill_geometry) {
            rec.nodes.push_back({row[1], row[2], row[3]});
            rec.weights.push_back(row[4]);
        }
        field.emplace_back(row.begin() + 5, row.end());
    }
    return field;
}

}  // namespace

void write_measurement(const MeasurementRecord& rec, const std::string& stem) {
    write_field_csv(stem + "_u.csv", rec, rec.u);
    write_field_csv(stem + "_dnu.csv", rec, rec.dnu);

    nlohmann::ordered_json meta;
    meta["format"] = "quenchloc-measurement";
    meta["version"] = 1;
    meta["ball"] = {{"center", {rec.ball.center.x, rec.ball.center.y, rec.ball.center.z}},
                    {"radius", rec.ball.radius}};
    meta["dt"] = rec.dt;
    meta["t_final"] = rec.t_final;
    meta["n_nodes"] = rec.nodes.size();
    meta["n_times"] = rec.times.size();
    std::ofstream out(stem + "_meta.json");
    if (!out) throw std::runtime_error("write_measurement: cannot open " + stem + "_meta.json");
    out << meta.dump(2) << "\n";
}

MeasurementRecord read_measurement(const std::string& stem) {
    std::ifstream meta_in(stem + "_meta.json");
    if (!meta_in) throw std::runtime_error("read_measurement: cannot open " + stem + "_meta.json");
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    if (meta.value("format", "") != "quenchloc-measurement")
        throw std::runtime_error("read_measurement: not a measurement sidecar: " + stem);

    MeasurementRecord rec;
    rec.ball.center = {meta["ball"]["center"][0], meta["ball"]["center"][1],
                       meta["ball"]["center"][2]};
    rec.ball.radius = meta["ball"]["radius"];
    rec.dt = meta["dt"];
    rec.t_final = meta["t_final"];
    const std::size_t n_times = meta["n_times"];
    rec.times.resize(n_times);
    for (std::size_t k = 0; k < n_times; ++k) rec.times[k] = rec.dt * static_cast<double>(k);

    rec.u = read_field_csv(stem + "_u.csv", rec, true);
    rec.dnu = read_field_csv(stem + "_dnu.csv", rec, false);
    if (rec.u.size() != rec.dnu.size() || rec.u.empty() || rec.u[0].size() != n_times)
        throw std::runtime_error("read_measurement: inconsistent CSV shapes for " + stem);
    return rec;
}

}  // namespace quench::forward
