// SPDX-License-Identifier: Apache-2.0
#include "quenchloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "quenchloc/numerics.hpp"

namespace quench::geometry {

namespace {
constexpr double kPi = std::numbers::pi;
}  // namespace

void DetectorBall::validate() const {
    if (!(radius > 0.0)) throw std::invalid_argument("DetectorBall: radius must be > 0");
}

double ParamPatch::scale() const {
    const Vec3 c00 = map(s_a, t_a), c11 = map(s_b, t_b);
    const Vec3 c01 = map(s_a, t_b), c10 = map(s_b, t_a);
    const double diag = std::max((c11 - c00).norm(), (c10 - c01).norm());
    return std::max(diag, std::max(span_s(), span_t()));
}

Vec3 ParamPatch::d_s(double s, double t) const {
    if (map_ds) return map_ds(s, t);
    const double h = 3e-6 * std::max(span_s(), 1e-12);
    const double lo = std::max(s - h, s_a), hi = std::min(s + h, s_b);
    return (map(hi, t) - map(lo, t)) / (hi - lo);
}

Vec3 ParamPatch::d_t(double s, double t) const {
    if (map_dt) return map_dt(s, t);
    const double h = 3e-6 * std::max(span_t(), 1e-12);
    const double lo = std::max(t - h, t_a), hi = std::min(t + h, t_b);
    return (map(s, hi) - map(s, lo)) / (hi - lo);
}

Vec3 ParamPatch::normal(double s, double t) const {
    const Vec3 c = d_s(s, t).cross(d_t(s, t));
    const double n = c.norm();
    if (n == 0.0) throw std::runtime_error("ParamPatch: degenerate normal requested");
    return c * (orientation / n);
}

double ParamPatch::area_density(double s, double t) const {
    return d_s(s, t).cross(d_t(s, t)).norm();
}

void ParamPatch::validate(int samples) const {
    if (!(s_b >= s_a) || !(t_b >= t_a)) throw std::invalid_argument("ParamPatch: empty rectangle");
    if (!map) throw std::invalid_argument("ParamPatch: missing map");
    if (orientation != 1.0 && orientation != -1.0)
        throw std::invalid_argument("ParamPatch: orientation must be +1 or -1");
    if (span_s() == 0.0 && span_t() == 0.0) return;  // point patch

    // Immersion on interior samples; injectivity spot check by pairwise
    // separation of distinct parameter samples.
    std::vector<Vec3> pts;
    std::vector<std::pair<double, double>> prm;
    for (int i = 1; i < samples - 1; ++i) {
        for (int j = 1; j < samples - 1; ++j) {
            const double s = s_a + span_s() * i / (samples - 1);
            const double t = t_a + span_t() * j / (samples - 1);
            if (area_density(s, t) <= 0.0)
                throw std::invalid_argument("ParamPatch: |phi_s x phi_t| vanishes in the interior");
            pts.push_back(map(s, t));
            prm.emplace_back(s, t);
        }
    }
    const double sep_tol = 1e-9 * std::max(scale(), 1e-12);
    for (std::size_t a = 0; a < pts.size(); ++a) {
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            if ((pts[a] - pts[b]).norm() < sep_tol) {
                // Periodic seams (t = 0 vs t = 2pi) collapse to the same
                // 3D point; only flag coincidences of well-separated
                // interior parameters in both coordinates.
                const double ds = std::abs(prm[a].first - prm[b].first) / std::max(span_s(), 1e-300);
                const double dt = std::abs(prm[a].second - prm[b].second) / std::max(span_t(), 1e-300);
                if (ds > 0.05 && dt > 0.05)
                    throw std::invalid_argument("ParamPatch: map is not injective (sampled)");
            }
        }
    }
}

double PatchGrid::area() const { return num::pairwise_sum(weights); }

PatchGrid make_patch_grid(const ParamPatch& patch, int n_s, int n_t) {
    if (n_s < 1 || n_t < 1) throw std::invalid_argument("make_patch_grid: grid must be >= 1x1");
    PatchGrid g;
    g.n_s = n_s;
    g.n_t = n_t;

    if (patch.span_s() == 0.0 && patch.span_t() == 0.0) {
        // Point patch: single node, unit weight (a point source carries its
        // weight through the density, not the area element).
        g.s = {patch.s_a};
        g.t = {patch.t_a};
        g.points = {patch.map(patch.s_a, patch.t_a)};
        g.normals = {Vec3{0, 0, 1}};
        g.weights = {1.0};
        return g;
    }

    const auto qs = num::gauss_legendre(n_s, patch.s_a, patch.s_b);
    const auto qt = num::gauss_legendre(n_t, patch.t_a, patch.t_b);
    g.s.reserve(static_cast<std::size_t>(n_s) * n_t);
    for (int i = 0; i < n_s; ++i) {
        for (int j = 0; j < n_t; ++j) {
            const double s = qs.nodes[i], t = qt.nodes[j];
            g.s.push_back(s);
            g.t.push_back(t);
            g.points.push_back(patch.map(s, t));
            g.normals.push_back(patch.normal(s, t));
            g.weights.push_back(qs.weights[i] * qt.weights[j] * patch.area_density(s, t));
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Analytic families
// ---------------------------------------------------------------------------

namespace {
struct Frame {
    Vec3 u, v, n;
};

Frame make_frame(const Vec3& normal) {
    Frame f;
    f.n = normal.normalized();
    f.u = any_orthogonal(f.n);
    f.v = f.n.cross(f.u);
    return f;
}
}  // namespace

ParamPatch make_disk_patch(const Vec3& center, const Vec3& normal, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("make_disk_patch: radius must be > 0");
    const Frame f = make_frame(normal);
    ParamPatch p;
    p.s_a = 0.0;
    p.s_b = radius;
    p.t_a = 0.0;
    p.t_b = 2.0 * kPi;
    p.map = [center, f](double s, double t) {
        return center + f.u * (s * std::cos(t)) + f.v * (s * std::sin(t));
    };
    p.map_ds = [f](double, double t) { return f.u * std::cos(t) + f.v * std::sin(t); };
    p.map_dt = [f](double s, double t) {
        return f.u * (-s * std::sin(t)) + f.v * (s * std::cos(t));
    };
    // phi_s x phi_t = s * (u x v) = s * n: orientation +1 keeps nu = +n.
    p.orientation = 1.0;
    return p;
}

ParamPatch make_rect_patch(const Vec3& origin, const Vec3& e1, const Vec3& e2, double len1,
                           double len2) {
    const Vec3 u1 = e1.normalized(), u2 = e2.normalized();
    if (std::abs(u1.dot(u2)) > 1e-9)
        throw std::invalid_argument("make_rect_patch: edge directions must be orthogonal");
    ParamPatch p;
    p.s_a = 0.0;
    p.s_b = len1;
    p.t_a = 0.0;
    p.t_b = len2;
    p.map = [origin, u1, u2](double s, double t) { return origin + u1 * s + u2 * t; };
    p.map_ds = [u1](double, double) { return u1; };
    p.map_dt = [u2](double, double) { return u2; };
    p.orientation = 1.0;  // nu = u1 x u2
    return p;
}

ParamPatch make_disk_segment_patch(const Vec3& center, const Vec3& normal, double radius,
                                   double x_min) {
    if (!(radius > 0.0) || !(x_min >= -radius) || !(x_min < radius))
        throw std::invalid_argument("make_disk_segment_patch: need -R <= x_min < R");
    const Frame f = make_frame(normal);
    ParamPatch p;
    p.s_a = x_min;
    p.s_b = radius;
    p.t_a = -1.0;
    p.t_b = 1.0;
    // (s,t) -> (s, t*sqrt(R^2-s^2)): covers {x in [x_min,R], |y| <= sqrt(R^2-x^2)}.
    p.map = [center, f, radius](double s, double t) {
        const double half = std::sqrt(std::max(radius * radius - s * s, 0.0));
        return center + f.u * s + f.v * (t * half);
    };
    p.map_ds = [f, radius](double s, double t) {
        const double half = std::sqrt(std::max(radius * radius - s * s, 1e-300));
        return f.u + f.v * (-t * s / half);
    };
    p.map_dt = [f, radius](double s, double) {
        return f.v * std::sqrt(std::max(radius * radius - s * s, 0.0));
    };
    p.orientation = 1.0;
    return p;
}

ParamPatch make_spherical_cap_patch(const Vec3& sphere_center, const Vec3& axis,
                                    double sphere_radius, double half_angle) {
    if (!(sphere_radius > 0.0) || !(half_angle > 0.0) || !(half_angle < kPi))
        throw std::invalid_argument("make_spherical_cap_patch: bad parameters");
    const Frame f = make_frame(axis);
    ParamPatch p;
    p.s_a = 0.0;
    p.s_b = half_angle;
    p.t_a = 0.0;
    p.t_b = 2.0 * kPi;
    p.map = [sphere_center, f, sphere_radius](double s, double t) {
        const Vec3 dir = f.n * std::cos(s) + (f.u * std::cos(t) + f.v * std::sin(t)) * std::sin(s);
        return sphere_center + dir * sphere_radius;
    };
    p.map_ds = [f, sphere_radius](double s, double t) {
        const Vec3 d = f.n * (-std::sin(s)) +
                       (f.u * std::cos(t) + f.v * std::sin(t)) * std::cos(s);
        return d * sphere_radius;
    };
    p.map_dt = [f, sphere_radius](double s, double t) {
        const Vec3 d = (f.u * (-std::sin(t)) + f.v * std::cos(t)) * std::sin(s);
        return d * sphere_radius;
    };
    // phi_s x phi_t points radially outward times R^2 sin(s); +1 keeps the
    // outward (away from sphere center) normal.
    p.orientation = 1.0;
    return p;
}

ParamPatch make_point_patch(const Vec3& point, const Vec3& normal) {
    ParamPatch p;
    p.s_a = p.s_b = 0.0;
    p.t_a = p.t_b = 0.0;
    p.map = [point](double, double) { return point; };
    p.orientation = 1.0;
    (void)normal;
    return p;
}

// ---------------------------------------------------------------------------
// set_distance / classify_minimum
// ---------------------------------------------------------------------------

namespace {

double h_of(const ParamPatch& patch, const Vec3& p, double s, double t) {
    return (patch.map(s, t) - p).norm();
}

struct Grad2 {
    double gs, gt;
};
struct Hess2 {
    double ss, st, tt;
};

Grad2 grad_h(const ParamPatch& patch, const Vec3& p, double s, double t, double hs, double ht) {
    const auto h = [&](double a, double b) { return h_of(patch, p, a, b); };
    return {(h(s + hs, t) - h(s - hs, t)) / (2 * hs), (h(s, t + ht) - h(s, t - ht)) / (2 * ht)};
}

Hess2 hess_h(const ParamPatch& patch, const Vec3& p, double s, double t, double hs, double ht) {
    const auto h = [&](double a, double b) { return h_of(patch, p, a, b); };
    const double c = h(s, t);
    Hess2 H;
    H.ss = (h(s + hs, t) - 2 * c + h(s - hs, t)) / (hs * hs);
    H.tt = (h(s, t + ht) - 2 * c + h(s, t - ht)) / (ht * ht);
    H.st = (h(s + hs, t + ht) - h(s + hs, t - ht) - h(s - hs, t + ht) + h(s - hs, t - ht)) /
           (4 * hs * ht);
    return H;
}

}  // namespace

DistanceResult set_distance(const ParamPatch& patch, const DetectorBall& ball, int grid_s,
                            int grid_t) {
    ball.validate();
    const bool point_patch = patch.span_s() == 0.0 && patch.span_t() == 0.0;
    if (!point_patch && (grid_s < 2 || grid_t < 2))
        throw std::invalid_argument("set_distance: grid must be >= 2x2");

    const Vec3 p = ball.center;
    double best_s = patch.s_a, best_t = patch.t_a;
    double best_h = h_of(patch, p, best_s, best_t);
    if (!point_patch) {
        for (int i = 0; i < grid_s; ++i) {
            const double s = patch.s_a + patch.span_s() * i / (grid_s - 1);
            for (int j = 0; j < grid_t; ++j) {
                const double t = patch.t_a + patch.span_t() * j / (grid_t - 1);
                const double h = h_of(patch, p, s, t);
                if (h < best_h) {
                    best_h = h;
                    best_s = s;
                    best_t = t;
                }
            }
        }

        // Damped Newton on h with projection onto the closed rectangle.
        const double hs = 1e-5 * std::max(patch.span_s(), 1e-12);
        const double ht = 1e-5 * std::max(patch.span_t(), 1e-12);
        double s = best_s, t = best_t;
        for (int iter = 0; iter < 60; ++iter) {
            const Grad2 g = grad_h(patch, p, s, t, hs, ht);
            const Hess2 H = hess_h(patch, p, s, t, hs, ht);
            double det = H.ss * H.tt - H.st * H.st;
            double ds, dt;
            if (det > 1e-14 && H.ss > 0) {
                ds = -(H.tt * g.gs - H.st * g.gt) / det;
                dt = -(H.ss * g.gt - H.st * g.gs) / det;
            } else {
                const double gn = std::hypot(g.gs, g.gt);
                if (gn == 0.0) break;
                const double step = 0.1 * std::max(patch.span_s(), patch.span_t());
                ds = -g.gs / gn * step;
                dt = -g.gt / gn * step;
            }
            double lambda = 1.0;
            bool accepted = false;
            for (int back = 0; back < 30; ++back) {
                const double ns = std::clamp(s + lambda * ds, patch.s_a, patch.s_b);
                const double nt = std::clamp(t + lambda * dt, patch.t_a, patch.t_b);
                const double nh = h_of(patch, p, ns, nt);
                if (nh < best_h) {
                    best_h = nh;
                    s = ns;
                    t = nt;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!accepted) break;
        }
        best_s = s;
        best_t = t;
        best_h = h_of(patch, p, s, t);
    }

    DistanceResult res;
    res.h_min = best_h;
    res.distance = best_h - ball.radius;
    res.s = best_s;
    res.t = best_t;
    if (!(res.distance > 0.0))
        throw std::runtime_error("set_distance: detector ball intersects the patch");
    return res;
}

const char* to_string(MinKind kind) {
    switch (kind) {
        case MinKind::interior_nondegenerate: return "interior-nondegenerate";
        case MinKind::boundary_noncritical: return "boundary-noncritical";
        case MinKind::degenerate_other: return "degenerate/other";
    }
    return "?";
}

MinClassification classify_minimum(const ParamPatch& patch, const DetectorBall& ball,
                                   const DistanceResult& argmin) {
    MinClassification c;
    c.s = argmin.s;
    c.t = argmin.t;
    c.h_min = argmin.h_min;
    c.delta = std::numeric_limits<double>::quiet_NaN();

    if (patch.span_s() == 0.0 && patch.span_t() == 0.0) {
        c.kind = MinKind::degenerate_other;
        return c;
    }

    const Vec3 p = ball.center;
    const double hs = 1e-5 * std::max(patch.span_s(), 1e-12);
    const double ht = 1e-5 * std::max(patch.span_t(), 1e-12);

    // Soft thresholds: the classification only feeds the Laplace-exponent
    // diagnostic. Curvature scale ~ 1/h_min (a sphere of radius h_min).
    const double curvature_scale = 1.0 / std::max(argmin.h_min, 1e-12);
    const double grad_tol = 1e-7 * std::max(1.0, curvature_scale);
    const double eig_tol = 1e-6 * curvature_scale;

    const double edge_s = std::min(c.s - patch.s_a, patch.s_b - c.s);
    const double edge_t = std::min(c.t - patch.t_a, patch.t_b - c.t);
    const bool on_boundary = edge_s < 1e-6 * std::max(patch.span_s(), 1e-12) ||
                             edge_t < 1e-6 * std::max(patch.span_t(), 1e-12);

    // A polar-style chart collapses one parameter edge to a single surface
    // point (the area density vanishes there). A minimum on such an edge is
    // interior in the surface sense, so probe h on shrinking surface rings
    // around the point instead of trusting the rectangle coordinates.
    const double density_here = patch.area_density(c.s, c.t);
    const double density_mid =
        patch.area_density(0.5 * (patch.s_a + patch.s_b), 0.5 * (patch.t_a + patch.t_b));
    const bool chart_singular = on_boundary && density_here < 1e-6 * density_mid;

    if (chart_singular) {
        const Vec3 x0 = patch.map(c.s, c.t);
        const bool s_edge = edge_s <= edge_t;
        double kappa_min = std::numeric_limits<double>::infinity();
        double kappa_max = 0.0;
        const double step = 1e-3 * (s_edge ? patch.span_s() : patch.span_t());
        const double base = s_edge ? (c.s == patch.s_a ? patch.s_a : patch.s_b)
                                   : (c.t == patch.t_a ? patch.t_a : patch.t_b);
        const double dir = (s_edge ? c.s == patch.s_a : c.t == patch.t_a) ? 1.0 : -1.0;
        for (int ring = 1; ring <= 2; ++ring) {
            const double off = base + dir * step * ring;
            for (int j = 0; j < 16; ++j) {
                const double other = s_edge ? patch.t_a + patch.span_t() * j / 16.0
                                            : patch.s_a + patch.span_s() * j / 16.0;
                const Vec3 x = s_edge ? patch.map(off, other) : patch.map(other, off);
                const double r2 = (x - x0).norm2();
                if (r2 <= 0.0) continue;
                const double kappa = 2.0 * ((x - p).norm() - argmin.h_min) / r2;
                kappa_min = std::min(kappa_min, kappa);
                kappa_max = std::max(kappa_max, kappa);
            }
        }
        c.grad = {0.0, 0.0};
        c.hessian = {kappa_min, 0.0, kappa_min};
        c.min_eigenvalue = kappa_min;
        if (kappa_min > eig_tol) {
            c.kind = MinKind::interior_nondegenerate;
            c.delta = 3.0;
        } else {
            c.kind = MinKind::degenerate_other;
        }
        return c;
    }

    const Grad2 g = grad_h(patch, p, c.s, c.t, hs, ht);
    const Hess2 H = hess_h(patch, p, c.s, c.t, hs, ht);
    c.grad = {g.gs, g.gt};
    c.hessian = {H.ss, H.st, H.tt};

    const double grad_norm = std::hypot(g.gs, g.gt);
    const double tr = H.ss + H.tt;
    const double det = H.ss * H.tt - H.st * H.st;
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    c.min_eigenvalue = tr / 2.0 - disc;

    if (!on_boundary && grad_norm <= grad_tol && c.min_eigenvalue > eig_tol) {
        c.kind = MinKind::interior_nondegenerate;
        c.delta = 3.0;
    } else if (on_boundary && grad_norm > grad_tol) {
        c.kind = MinKind::boundary_noncritical;
        c.delta = 3.5;
    } else {
        c.kind = MinKind::degenerate_other;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Visibility and alpha/beta
// ---------------------------------------------------------------------------

VisibilityPartition visibility_partition(const ParamPatch& patch, const DetectorBall& ball,
                                         double eps, int grid_s, int grid_t) {
    if (eps < 0.0) throw std::invalid_argument("visibility_partition: eps must be >= 0");
    ball.validate();
    const PatchGrid grid = make_patch_grid(patch, grid_s, grid_t);
    const DistanceResult d = set_distance(patch, ball, grid_s, grid_t);

    std::vector<double> w_vis, w_hid0;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double support = grid.normals[i].dot(ball.center - grid.points[i]) - ball.radius;
        if (support > eps) w_vis.push_back(grid.weights[i]);
        if (support <= 0.0) {
            w_hid0.push_back(grid.weights[i]);
            const double de_x = (grid.points[i] - ball.center).norm() - ball.radius;
            margin = std::min(margin, de_x - d.distance);
        }
    }
    VisibilityPartition part;
    part.area_visible = num::pairwise_sum(w_vis);
    part.area_hidden = num::pairwise_sum(w_hid0);
    const double area = grid.area();
    part.fraction_visible = area > 0.0 ? part.area_visible / area : 0.0;
    part.gamma1_distance_margin = margin;
    return part;
}

AlphaBeta alpha_beta(const ParamPatch& patch, const DetectorBall& ball, int grid_s, int grid_t,
                     double margin) {
    ball.validate();
    const PatchGrid grid = make_patch_grid(patch, grid_s, grid_t);
    double min_support = std::numeric_limits<double>::infinity();
    double max_reach = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double along = grid.normals[i].dot(ball.center - grid.points[i]);
        min_support = std::min(min_support, along - ball.radius);
        max_reach = std::max(max_reach, along + ball.radius);
    }
    AlphaBeta ab;
    ab.alpha = std::max(0.0, -min_support) + margin;
    ab.beta = std::max(0.0, max_reach) + margin;
    return ab;
}

// ---------------------------------------------------------------------------
// TriMesh
// ---------------------------------------------------------------------------

void TriMesh::validate() const {
    for (const auto& t : triangles) {
        for (const auto idx : t)
            if (idx >= vertices.size()) throw std::invalid_argument("TriMesh: index out of range");
        const Vec3 a = vertices[t[0]], b = vertices[t[1]], c = vertices[t[2]];
        if ((b - a).cross(c - a).norm() <= 0.0)
            throw std::invalid_argument("TriMesh: degenerate triangle");
    }
}

double TriMesh::min_edge_length() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e)
            m = std::min(m, (vertices[t[e]] - vertices[t[(e + 1) % 3]]).norm());
    return m;
}

double TriMesh::mean_edge_length() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e) {
            sum += (vertices[t[e]] - vertices[t[(e + 1) % 3]]).norm();
            ++n;
        }
    return n ? sum / static_cast<double>(n) : 0.0;
}

TriMesh load_off(std::istream& in) {
    std::string tok;
    if (!(in >> tok) || tok != "OFF") throw std::runtime_error("load_off: missing OFF header");
    std::size_t nv = 0, nf = 0, ne = 0;
    if (!(in >> nv >> nf >> ne)) throw std::runtime_error("load_off: malformed counts");
    TriMesh m;
    m.vertices.resize(nv);
    for (auto& v : m.vertices)
        if (!(in >> v.x >> v.y >> v.z)) throw std::runtime_error("load_off: bad vertex");
    for (std::size_t f = 0; f < nf; ++f) {
        std::size_t k = 0;
        if (!(in >> k) || k < 3) throw std::runtime_error("load_off: bad face");
        std::vector<std::uint32_t> idx(k);
        for (auto& i : idx)
            if (!(in >> i)) throw std::runtime_error("load_off: bad face index");
        for (std::size_t j = 1; j + 1 < k; ++j)
            m.triangles.push_back({idx[0], idx[j], idx[j + 1]});
    }
    m.validate();
    return m;
}

TriMesh load_obj(std::istream& in) {
    TriMesh m;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z)) throw std::runtime_error("load_obj: bad vertex");
            m.vertices.push_back(v);
        } else if (key == "f") {
            std::vector<std::uint32_t> idx;
            std::string ref;
            while (ls >> ref) {
                // "i", "i/j", "i/j/k", "i//k"
                const auto slash = ref.find('/');
                const long v = std::stol(ref.substr(0, slash));
                const long resolved = v > 0 ? v - 1 : static_cast<long>(m.vertices.size()) + v;
                if (resolved < 0) throw std::runtime_error("load_obj: bad face index");
                idx.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (idx.size() < 3) throw std::runtime_error("load_obj: face with < 3 vertices");
            for (std::size_t j = 1; j + 1 < idx.size(); ++j)
                m.triangles.push_back({idx[0], idx[j], idx[j + 1]});
        }
    }
    m.validate();
    return m;
}

void save_off(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_off: cannot open " + path);
    out << "OFF\n" << mesh.vertices.size() << " " << mesh.triangles.size() << " 0\n";
    char buf[32];
    for (const auto& v : mesh.vertices) {
        const double c[3] = {v.x, v.y, v.z};
        for (int i = 0; i < 3; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", c[i]);
            out << buf << (i == 2 ? '\n' : ' ');
        }
    }
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_mesh: cannot open " + path);
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
    if (ext == "off" || ext == "OFF") return load_off(in);
    if (ext == "obj" || ext == "OBJ") return load_obj(in);
    throw std::runtime_error("load_mesh: unsupported extension ." + ext + " (need .off or .obj)");
}

TriMesh make_sphere_mesh(const Vec3& center, double radius, int n_lat, int n_lon) {
    if (n_lat < 2 || n_lon < 3) throw std::invalid_argument("make_sphere_mesh: grid too small");
    TriMesh m;
    // Interior rings plus two poles.
    for (int i = 1; i <= n_lat; ++i) {
        const double theta = kPi * i / (n_lat + 1);
        for (int j = 0; j < n_lon; ++j) {
            const double phi = 2.0 * kPi * j / n_lon;
            m.vertices.push_back(center + Vec3{radius * std::sin(theta) * std::cos(phi),
                                               radius * std::sin(theta) * std::sin(phi),
                                               radius * std::cos(theta)});
        }
    }
    const std::uint32_t north = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back(center + Vec3{0, 0, radius});
    const std::uint32_t south = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.push_back(center + Vec3{0, 0, -radius});

    const auto ring = [n_lon](int i, int j) {
        return static_cast<std::uint32_t>(i * n_lon + (j % n_lon));
    };
    for (int j = 0; j < n_lon; ++j) {
        m.triangles.push_back({north, ring(0, j), ring(0, j + 1)});
        m.triangles.push_back({south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)});
    }
    for (int i = 0; i + 1 < n_lat; ++i) {
        for (int j = 0; j < n_lon; ++j) {
            m.triangles.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            m.triangles.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    }
    m.validate();
    return m;
}

bool segment_intersects_mesh(const TriMesh& mesh, const Vec3& a, const Vec3& b) {
    const Vec3 dir = b - a;
    const double len = dir.norm();
    if (len == 0.0) return false;
    for (const auto& t : mesh.triangles) {
        // Moller-Trumbore
        const Vec3 v0 = mesh.vertices[t[0]];
        const Vec3 e1 = mesh.vertices[t[1]] - v0;
        const Vec3 e2 = mesh.vertices[t[2]] - v0;
        const Vec3 pv = dir.cross(e2);
        const double det = e1.dot(pv);
        if (std::abs(det) < 1e-15) continue;
        const double inv = 1.0 / det;
        const Vec3 tv = a - v0;
        const double u = tv.dot(pv) * inv;
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 qv = tv.cross(e1);
        const double v = dir.dot(qv) * inv;
        if (v < 0.0 || u + v > 1.0) continue;
        const double s = e2.dot(qv) * inv;
        if (s > 1e-9 && s < 1.0 - 1e-9) return true;
    }
    return false;
}

double point_mesh_distance(const TriMesh& mesh, const Vec3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : mesh.vertices) best = std::min(best, (v - p).norm());
    return best;
}

}  // namespace quench::geometry
