// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_GEOMETRY_HPP
#define QUENCHLOC_GEOMETRY_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "quenchloc/vec3.hpp"

namespace quench::geometry {

// Spherical detector (OST), disjoint from the cavity and the quench patch.
struct DetectorBall {
    Vec3 center;
    double radius = 0.0;

    void validate() const;  // throws std::invalid_argument if radius <= 0
};

// Smooth parametrized surface patch: phi maps the parameter rectangle
// [s_a,s_b] x [t_a,t_b] into R^3. `orientation` fixes the outward normal
// nu = orientation * (phi_s x phi_t)/|phi_s x phi_t|.
struct ParamPatch {
    double s_a = 0.0, s_b = 1.0;
    double t_a = 0.0, t_b = 1.0;
    std::function<Vec3(double, double)> map;
    // Analytic partials; the built-in families provide them. Central
    // differences stand in when absent (tabulated or user-supplied maps).
    std::function<Vec3(double, double)> map_ds, map_dt;
    double orientation = 1.0;  // +1 or -1

    double span_s() const { return s_b - s_a; }
    double span_t() const { return t_b - t_a; }
    // Geometric scale used for finite-difference steps.
    double scale() const;

    Vec3 point(double s, double t) const { return map(s, t); }
    Vec3 d_s(double s, double t) const;
    Vec3 d_t(double s, double t) const;
    Vec3 normal(double s, double t) const;
    // |phi_s x phi_t|, the surface measure density.
    double area_density(double s, double t) const;

    // Immersion and injectivity spot checks on a sample grid; throws on
    // failure. Degenerate parametrization edges (e.g. the axis of a polar
    // map) are tolerated: the check skips samples where the density
    // vanishes but insists it is positive on interior quadrature nodes.
    void validate(int samples = 17) const;
};

// Tensor Gauss-Legendre quadrature over the patch: nodes x_i on the surface
// with weights that include the area density, plus normals.
struct PatchGrid {
    std::vector<double> s, t;          // parameter coordinates per node
    std::vector<Vec3> points;
    std::vector<Vec3> normals;
    std::vector<double> weights;       // sum approximates area(patch)
    int n_s = 0, n_t = 0;

    std::size_t size() const { return points.size(); }
    double area() const;
};

PatchGrid make_patch_grid(const ParamPatch& patch, int n_s, int n_t);

// Named analytic patch families used by scenarios and tests.
// Disk of radius R about `center` with unit normal `normal`, polar
// parametrization (s,t) in [0,R] x [0,2pi].
ParamPatch make_disk_patch(const Vec3& center, const Vec3& normal, double radius);
// Planar rectangle: origin + s*e1 + t*e2, (s,t) in [0,len1] x [0,len2].
ParamPatch make_rect_patch(const Vec3& origin, const Vec3& e1, const Vec3& e2,
                           double len1, double len2);
// Disk segment {x^2+y^2 <= R^2, x >= x_min} in the frame (center, normal);
// the distance minimizer sits on the straight edge s = x_min.
ParamPatch make_disk_segment_patch(const Vec3& center, const Vec3& normal, double radius,
                                   double x_min);
// Spherical cap of the sphere |x - sphere_center| = R with opening angle
// `half_angle` about direction `axis`.
ParamPatch make_spherical_cap_patch(const Vec3& sphere_center, const Vec3& axis,
                                    double sphere_radius, double half_angle);
// Degenerate single-point patch (a point source stand-in).
ParamPatch make_point_patch(const Vec3& point, const Vec3& normal);

// ---------------------------------------------------------------------------
// Distance and minimum classification
// ---------------------------------------------------------------------------

struct DistanceResult {
    double distance = 0.0;   // min |phi(s,t) - p| - r
    double h_min = 0.0;      // min |phi(s,t) - p|
    double s = 0.0, t = 0.0; // argmin in parameter space
};

// Euclidean set distance d_e(patch, ball): coarse grid scan (including the
// rectangle boundary) refined by damped projected Newton on
// h(s,t) = |phi(s,t) - p|. Throws std::runtime_error if the refined
// minimum is <= 0 (ball intersects the patch).
DistanceResult set_distance(const ParamPatch& patch, const DetectorBall& ball,
                            int grid_s = 64, int grid_t = 64);

enum class MinKind : std::uint8_t {
    interior_nondegenerate,
    boundary_noncritical,
    degenerate_other,
};

struct MinClassification {
    double s = 0.0, t = 0.0;
    MinKind kind = MinKind::degenerate_other;
    double h_min = 0.0;
    // Laplace exponent delta: 3 for an interior nondegenerate minimum,
    // 3.5 for a boundary non-critical one, NaN when unknown.
    double delta = 0.0;
    std::array<double, 2> grad{};       // grad h at the argmin
    std::array<double, 3> hessian{};    // (h_ss, h_st, h_tt)
    double min_eigenvalue = 0.0;
};

const char* to_string(MinKind kind);

MinClassification classify_minimum(const ParamPatch& patch, const DetectorBall& ball,
                                   const DistanceResult& argmin);

// ---------------------------------------------------------------------------
// Visibility partition and the alpha/beta bounds
// ---------------------------------------------------------------------------

struct VisibilityPartition {
    double area_visible = 0.0;    // measure of Gamma_0(eps)
    double area_hidden = 0.0;     // measure of Gamma_1 = Gamma \ Gamma_0(0)
    double fraction_visible = 0.0;
    // Margin min over Gamma_1 of d_e(x,B) - d_e(Gamma,B); +inf when
    // Gamma_1 is empty. The theory needs this positive.
    double gamma1_distance_margin = 0.0;
};

// Per node x: x in Gamma_0(eps) iff nu(x).(p - x) - r > eps. For a ball the
// minimum of nu(x).(y - x) over y in B is exactly nu(x).(p - x) - r.
VisibilityPartition visibility_partition(const ParamPatch& patch, const DetectorBall& ball,
                                         double eps, int grid_s = 64, int grid_t = 64);

struct AlphaBeta {
    double alpha = 0.0;
    double beta = 0.0;
};

// Bounds with -alpha < nu(x).(y-x) < beta for all x in Gamma, y in B; a
// small margin keeps the inequalities strict.
AlphaBeta alpha_beta(const ParamPatch& patch, const DetectorBall& ball,
                     int grid_s = 64, int grid_t = 64, double margin = 1e-6);

// ---------------------------------------------------------------------------
// Triangle mesh (cavity boundary for triangulation)
// ---------------------------------------------------------------------------

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;

    void validate() const;  // index range + nondegenerate triangles
    double min_edge_length() const;
    double mean_edge_length() const;
};

// Loaders for OFF and Wavefront OBJ (vertices + triangles only; polygonal
// faces are fan-triangulated).
TriMesh load_mesh(const std::string& path);
TriMesh load_off(std::istream& in);
TriMesh load_obj(std::istream& in);
void save_off(const TriMesh& mesh, const std::string& path);

// Latitude/longitude sphere mesh (n_lat*n_lon + 2 vertices).
TriMesh make_sphere_mesh(const Vec3& center, double radius, int n_lat, int n_lon);

// True if the open segment (a,b) crosses any mesh triangle. Used as the
// line-of-sight check between the patch argmin and a detector.
bool segment_intersects_mesh(const TriMesh& mesh, const Vec3& a, const Vec3& b);

// Distance from a point to the closest vertex of the mesh (for disjointness
// checks at scenario load).
double point_mesh_distance(const TriMesh& mesh, const Vec3& p);

}  // namespace quench::geometry

#endif
