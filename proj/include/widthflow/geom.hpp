#pragma once

#include <functional>
#include <span>
#include <vector>

#include "widthflow/speed.hpp"
#include "widthflow/tri_mesh.hpp"

namespace widthflow {

// Axially symmetric convex body described by its support function h(theta),
// theta the polar angle of the outward normal. Samples sit on the uniform
// grid theta_j = j * pi / intervals, j = 0..intervals, so values().front()
// and values().back() are the pole values h(0) and h(pi).
class AxiSurface {
 public:
  // Throws InvalidSurface on fewer than 4 intervals or non-positive samples.
  explicit AxiSurface(std::vector<double> values);

  static AxiSurface from_function(int intervals, const std::function<double(double)>& h);

  int intervals() const { return static_cast<int>(h_.size()) - 1; }
  double spacing() const;
  double theta(int j) const { return j * spacing(); }
  double h(int j) const { return h_[static_cast<std::size_t>(j)]; }
  std::span<const double> values() const { return h_; }
  // Interior polar angles theta_1 .. theta_{intervals-1}.
  std::vector<double> grid() const;
  std::pair<double, double> pole_values() const { return {h_.front(), h_.back()}; }

  // Central-difference dh/dtheta; zero at the poles by even reflection.
  double derivative(int j) const;
  // Principal radii (meridian, parallel) at node j; equal at the poles.
  std::pair<double, double> radii(int j) const;
  // Boundary point in the meridian plane: (distance from axis, height).
  std::pair<double, double> profile_point(int j) const;

  // Translate the body by dz along the symmetry axis.
  AxiSurface translated(double dz) const;
  // Keep every stride-th node; intervals must be divisible by stride.
  AxiSurface subsampled(int stride) const;

 private:
  std::vector<double> h_;
};

AxiSurface sphere_axi(int intervals, double radius);
// Spheroid with equatorial semi-axis a (x, y) and polar semi-axis c (z):
// h(theta) = sqrt(a^2 sin^2 + c^2 cos^2).
AxiSurface spheroid_axi(int intervals, double a, double c);

// Principal curvatures (ascending), inward unit normal and mean curvature
// |k_min + k_max| at each sample point of a surface.
struct CurvaturePoint {
  double k_min = 0.0;
  double k_max = 0.0;
  Vec3 normal = Vec3::Zero();
  double mean = 0.0;
};

struct CurvatureField {
  std::vector<CurvaturePoint> points;

  std::size_t size() const { return points.size(); }
  const CurvaturePoint& operator[](std::size_t i) const { return points[i]; }
  double min_curvature() const;
};

// Throws ConvexityLost if a principal radius is not positive. Normals are
// reported in the meridian half-plane y = 0.
CurvatureField curvatures_axi(const AxiSurface& surface);

// Per-vertex principal curvatures from an osculating paraboloid fitted over
// the ring_depth-ring neighbourhood. Throws FitRankDeficient when the
// neighbourhood cannot determine a curved quadric.
CurvatureField curvatures_mesh(const TriMesh& mesh, int ring_depth = 2);

// Area-weighted inward vertex normals.
std::vector<Vec3> inward_vertex_normals(const TriMesh& mesh);

// Surface-of-revolution triangulation of the boundary: one ring per interior
// node with azimuth_count vertices plus the two poles.
TriMesh axi_to_mesh(const AxiSurface& surface, int azimuth_count);

// sup |H| / (n F(lambda)) over the field; spec.n() must be 2.
double pinching_ratio(const CurvatureField& field, const SpeedSpec& spec);

// Height of the solid's centroid on the symmetry axis.
double axial_centroid(const AxiSurface& surface);

// Smallest support value measured from the centroid. Throws CentroidOutside
// when the centroid is not strictly inside.
double inradius(const AxiSurface& surface);
double inradius(const TriMesh& mesh);

}  // namespace widthflow
