// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/indicator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "quenchloc/numerics.hpp"

namespace quench::indicator {

double time_laplace(std::span<const double> series, double dt, double tau) {
    if (series.size() < 2) throw std::invalid_argument("time_laplace: need >= 2 samples");
    if (!(dt > 0.0) || !(tau > 0.0))
        throw std::invalid_argument("time_laplace: need dt > 0 and tau > 0");
    const double a = tau * dt;
    // Per-interval closed forms against the linear interpolant:
    //   int_0^dt e^{-tau s} ds          = dt phi1(a)
    //   int_0^dt (s/dt) e^{-tau s} ds   = dt phi2(a)
    const double c0 = dt * num::expm1_ratio(a);
    const double c1 = dt * num::exp_linear_weight(a);
    const double w_left = c0 - c1, w_right = c1;

    std::vector<double> terms(series.size() - 1);
    for (std::size_t k = 0; k + 1 < series.size(); ++k) {
        const double e_k = std::exp(-tau * dt * static_cast<double>(k));
        terms[k] = e_k * (w_left * series[k] + w_right * series[k + 1]);
    }
    return num::pairwise_sum(terms);
}

bool IndicatorCurve::all_zero() const {
    for (const auto& p : points)
        if (p.sign != 0) return false;
    return true;
}

void IndicatorCurve::validate() const {
    for (std::size_t k = 0; k + 1 < points.size(); ++k)
        if (!(points[k].tau < points[k + 1].tau))
            throw std::invalid_argument("IndicatorCurve: ladder must be strictly increasing");
    for (const auto& p : points) {
        if (p.sign != 0 && p.value != 0.0) {
            const double diff = std::abs(std::log(std::abs(p.value)) - p.log_abs);
            if (diff > 1e-9)
                throw std::invalid_argument("IndicatorCurve: log_abs inconsistent with value");
        }
    }
}

namespace {

// Signed surface sum with a cancellation diagnostic. The reduction is
// fixed-order pairwise, so results are bit-stable; the flag trips when the
// summands cancel so heavily that the surface quadrature cannot be trusted
// (typical near a sign change of I).
IndicatorPoint reduce_terms(double tau, std::vector<double>& terms) {
    IndicatorPoint p;
    p.tau = tau;
    const double total = num::pairwise_sum(terms);
    for (double& t : terms) t = std::abs(t);
    const double gross = num::pairwise_sum(terms);
    p.value = total;
    p.sign = total > 0.0 ? 1 : (total < 0.0 ? -1 : 0);
    p.log_abs = p.sign != 0 ? std::log(std::abs(total)) : 0.0;
    p.error_flag = gross > 0.0 && std::abs(total) < 1e-8 * gross;
    return p;
}

}  // namespace

IndicatorPoint indicator_measurement(const forward::MeasurementRecord& rec, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("indicator_measurement: tau must be > 0");
    potentials::BallPotential bp{rec.ball, tau};
    bp.validate();
    const double r = rec.ball.radius;
    // On dB every node sits at rho = r, so v and dnu_v are scalars.
    const double v_r = potentials::v_exterior_rho(r, bp);
    const double dv_r = potentials::dv_exterior_rho(r, bp);

    std::vector<double> terms(rec.nodes.size());
    for (std::size_t i = 0; i < rec.nodes.size(); ++i) {
        const double W = time_laplace(rec.u[i], rec.dt, tau);
        const double D = time_laplace(rec.dnu[i], rec.dt, tau);
        terms[i] = rec.weights[i] * (W * dv_r - v_r * D);
    }
    return reduce_terms(tau, terms);
}

IndicatorPoint indicator_gamma(const forward::BoundaryProfiles& bpf,
                               const geometry::PatchGrid& grid,
                               const geometry::DetectorBall& ball, double tau) {
    if (bpf.f.size() != grid.size())
        throw std::invalid_argument("indicator_gamma: profile/grid size mismatch");
    potentials::BallPotential bp{ball, tau};
    bp.validate();
    const double dt = bpf.times.size() > 1 ? bpf.times[1] - bpf.times[0] : 0.0;

    std::vector<double> terms(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double f_tau = time_laplace(bpf.f[i], dt, tau);
        const double g_tau = time_laplace(bpf.g[i], dt, tau);
        const Vec3 x = grid.points[i];
        const double v = potentials::v_exterior(x, bp);
        const double dnu_v = potentials::grad_v_exterior(x, bp).dot(grid.normals[i]);
        terms[i] = grid.weights[i] * (f_tau * dnu_v - v * g_tau);
    }
    return reduce_terms(tau, terms);
}

std::vector<double> LadderSpec::taus() const {
    if (count < 1) throw std::invalid_argument("LadderSpec: empty ladder");
    if (!(tau_min > 0.0) || !(tau_max >= tau_min))
        throw std::invalid_argument("LadderSpec: need 0 < tau_min <= tau_max");
    std::vector<double> t(count);
    if (count == 1) {
        t[0] = tau_min;
        return t;
    }
    const double step = (tau_max - tau_min) / (count - 1);
    for (int k = 0; k < count; ++k) t[k] = tau_min + step * k;
    return t;
}

LadderSpec LadderSpec::auto_from_distance(double d_guess, int count) {
    if (!(d_guess > 0.0)) throw std::invalid_argument("LadderSpec: d_guess must be > 0");
    LadderSpec s;
    s.tau_min = 10.0 / d_guess;
    s.tau_max = 40.0 / d_guess;
    s.count = count;
    return s;
}

IndicatorCurve indicator_curve_measurement(const forward::MeasurementRecord& rec,
                                           const LadderSpec& ladder) {
    IndicatorCurve c;
    c.side = CurveSide::measurement;
    c.t_final = rec.t_final;
    for (double tau : ladder.taus()) c.points.push_back(indicator_measurement(rec, tau));
    c.validate();
    return c;
}

IndicatorCurve indicator_curve_gamma(const forward::BoundaryProfiles& bpf,
                                     const geometry::PatchGrid& grid,
                                     const geometry::DetectorBall& ball,
                                     const LadderSpec& ladder) {
    IndicatorCurve c;
    c.side = CurveSide::gamma;
    c.t_final = bpf.times.empty() ? 0.0 : bpf.times.back();
    for (double tau : ladder.taus()) c.points.push_back(indicator_gamma(bpf, grid, ball, tau));
    c.validate();
    return c;
}

void IndicatorCurve::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("IndicatorCurve: cannot open " + path);
    out << "# side=" << (side == CurveSide::measurement ? "measurement" : "gamma")
        << " T0=";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", t_final);
    out << buf << "\n";
    out << "tau,sign,log_abs,value,error_flag\n";
    for (const auto& p : points) {
        std::snprintf(buf, sizeof buf, "%.17g", p.tau);
        out << buf << ',' << p.sign << ',';
        std::snprintf(buf, sizeof buf, "%.17g", p.log_abs);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", p.value);
        out << buf << ',' << (p.error_flag ? 1 : 0) << "\n";
    }
}

IndicatorCurve IndicatorCurve::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("IndicatorCurve: cannot open " + path);
    IndicatorCurve c;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# side=", 0) != 0)
        throw std::runtime_error("IndicatorCurve: missing header in " + path);
    {
        std::istringstream hs(line.substr(2));
        std::string kv;
        while (hs >> kv) {
            if (kv.rfind("side=", 0) == 0)
                c.side = kv.substr(5) == "gamma" ? CurveSide::gamma : CurveSide::measurement;
            else if (kv.rfind("T0=", 0) == 0)
                c.t_final = std::stod(kv.substr(3));
        }
    }
    std::getline(in, line);  // column header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        IndicatorPoint p;
        std::istringstream ls(line);
        std::string tok;
        std::getline(ls, tok, ',');
        p.tau = std::stod(tok);
        std::getline(ls, tok, ',');
        p.sign = std::stoi(tok);
        std::getline(ls, tok, ',');
        p.log_abs = std::stod(tok);
        std::getline(ls, tok, ',');
        p.value = std::stod(tok);
        std::getline(ls, tok, ',');
        p.error_flag = tok == "1";
        c.points.push_back(p);
    }
    c.validate();
    return c;
}

}  // namespace quench::indicator
