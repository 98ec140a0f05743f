#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "widthflow/geom.hpp"
#include "widthflow/speed.hpp"
#include "widthflow/tri_mesh.hpp"

namespace widthflow {

// A point on a mesh: containing face, barycentric coordinates in that face
// and the resulting position on the curved interpolant (see MeshLocator).
struct SurfacePoint {
  int face = -1;
  Vec3 bary = Vec3::Zero();
  Vec3 position = Vec3::Zero();
};

// Closed polygon on a mesh (the last point connects back to the first).
struct SurfaceCurve {
  std::vector<SurfacePoint> points;
  bool is_degenerate = false;

  std::size_t size() const { return points.size(); }
};

// Sum of chord lengths; 0 for degenerate curves.
double curve_length(const SurfaceCurve& c);
// L^2 / (2 pi), the energy of the constant-speed parameterization over a
// circle of length 2 pi.
double curve_energy(const SurfaceCurve& c);
// Sum of exterior turning angles.
double total_curvature(const SurfaceCurve& c);
std::vector<Vec3> curve_positions(const SurfaceCurve& c);

// Point location on a fixed mesh. Positions are evaluated on the Phong
// tessellation of the mesh (vertex normals by Max's weights), a curved
// interpolant that removes the facet creases a flat mesh would impose on
// short curves. Immutable after construction, so one locator may serve
// concurrent tightening of many curves.
class MeshLocator {
 public:
  explicit MeshLocator(TriMesh mesh);

  const TriMesh& mesh() const { return mesh_; }
  double bounding_box_diagonal() const { return diag_; }
  double mean_edge_length() const { return mean_edge_; }

  // Closest point on the mesh, searched by walking from `hint` (any face
  // when hint < 0) with a global scan as fallback.
  SurfacePoint closest(const Vec3& p, int hint = -1) const;
  // Point where the line through p along the interpolated normal meets the
  // surface. Falls back to closest(). Throws ProjectionFailed if the result
  // is further than 5% of the bounding-box diagonal from p.
  SurfacePoint project(const Vec3& p, int hint = -1) const;
  // As above, starting the search from a nearby surface point.
  SurfacePoint project(const Vec3& p, const SurfacePoint& start) const;
  // Outward normal interpolated from area-weighted vertex normals.
  Vec3 smooth_normal(const SurfacePoint& sp) const;
  SurfacePoint make_point(int face, const Vec3& bary) const;

 private:
  SurfacePoint project_from(const Vec3& p, SurfacePoint sp) const;
  bool ray_walk(const Vec3& p, const Vec3& dir, int face, SurfacePoint& out) const;
  SurfacePoint closest_in_face(const Vec3& p, int face) const;

  TriMesh mesh_;
  std::vector<Vec3> vertex_normals_;
  double diag_ = 0.0;
  double mean_edge_ = 0.0;
};

// Height-function sweepout: slices[i] is the plane section <x, axis> = c_i,
// c_i evenly spaced from the minimum to the maximum height; params[i] runs
// over [-1, 1]. The two boundary slices are single points.
struct Sweepout {
  Vec3 axis = Vec3::UnitZ();
  std::vector<double> params;
  std::vector<SurfaceCurve> slices;
};

// spacing <= 0 selects twice the mean edge length. Slices are resampled to
// uniform arc length at that spacing. Throws EmptySlice when an interior
// plane misses the mesh.
Sweepout build_sweepout(const TriMesh& mesh, const Vec3& axis, int slice_count,
                        double spacing = 0.0);

// Section of the mesh by the plane <x, normal> = offset, resampled as above.
SurfaceCurve plane_section(const MeshLocator& locator, const Vec3& normal, double offset,
                           double spacing = 0.0);

// Alternating even/odd passes replacing each point by the projected midpoint
// of its neighbours. A replacement is kept only if it shortens the curve, so
// length never increases. Curves shorter than 1e-3 of the bounding-box
// diagonal become degenerate. If `lengths` is given, the length after each
// sweep is appended.
SurfaceCurve birkhoff_tighten(const SurfaceCurve& c, const MeshLocator& locator, int sweeps,
                              std::vector<double>* lengths = nullptr);
SurfaceCurve birkhoff_tighten(const SurfaceCurve& c, const TriMesh& mesh, int sweeps);

struct TightenResult {
  Sweepout sweepout;
  double max_energy = 0.0;
  int argmax_index = 0;
};

// Tightens every slice with the same sweep count. jobs > 1 spreads slices
// over threads; the result does not depend on jobs.
TightenResult tighten_sweepout(const Sweepout& sw, const MeshLocator& locator, int sweeps,
                               int jobs = 1);

// Geodesic curvature of a closed polygon: the discrete curvature vector with
// its surface-normal and tangent components removed, maximised over points.
// Zero for curves with fewer than 3 points.
double geodesic_residual(const SurfaceCurve& c, const MeshLocator& locator);
double geodesic_residual(const SurfaceCurve& c, const TriMesh& mesh);

// Coordinate axes followed by random_count uniformly random unit vectors.
std::vector<Vec3> default_axes(int random_count = 10, std::uint64_t seed = 0);

struct WidthEstimate {
  double value = 0.0;
  Vec3 axis = Vec3::UnitZ();
  int argmax_index = 0;
  double geodesic_residual = 0.0;
  int tighten_iterations = 0;
  int slice_count = 0;
  bool degenerate = false;
  // Largest constant-speed parameter speed L / (2 pi) times the worst
  // segment-length ratio; a diagnostic, not a proven bound.
  double lipschitz_proxy = 0.0;
  std::vector<double> per_axis;
  SurfaceCurve argmax_curve;
};

// min over axes of the tightened max-slice energy: an upper bound for the
// min-max width.
WidthEstimate width_estimate(const TriMesh& mesh, std::span<const Vec3> axes, int slice_count,
                             int sweeps, int jobs = 1);

// Mesh moved by h F(lambda) nu at every vertex (nu inward).
TriMesh displaced_mesh(const TriMesh& mesh, const SpeedSpec& spec, const CurvatureField& field,
                       double h);
// Curve carried to a displaced copy of its mesh (same topology): each point
// keeps its face and barycentric coordinates.
SurfaceCurve transport_curve(const SurfaceCurve& c, const TriMesh& flowed);
SurfaceCurve transport_curve(const SurfaceCurve& c, const MeshLocator& flowed);
SurfaceCurve transport_curve(const SurfaceCurve& c, const TriMesh& mesh, const SpeedSpec& spec,
                             const CurvatureField& field, double h);

}  // namespace widthflow
