#include "widthflow/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "widthflow/error.hpp"

namespace widthflow {

namespace {

// sin, cos and cot of the grid angles. Flows evaluate these every step at a
// fixed resolution, so the last table is kept per thread.
struct GridTrig {
  int intervals = 0;
  std::vector<double> sin, cos, cot;
};

const GridTrig& grid_trig(int intervals) {
  thread_local std::shared_ptr<GridTrig> cached;
  if (!cached || cached->intervals != intervals) {
    auto t = std::make_shared<GridTrig>();
    t->intervals = intervals;
    const auto n = static_cast<std::size_t>(intervals) + 1;
    t->sin.resize(n);
    t->cos.resize(n);
    t->cot.resize(n);
    for (int j = 0; j <= intervals; ++j) {
      const double th = j * std::numbers::pi / intervals;
      const auto i = static_cast<std::size_t>(j);
      t->sin[i] = std::sin(th);
      t->cos[i] = std::cos(th);
      t->cot[i] = std::cos(th) / std::sin(th);
    }
    // Exact values at the poles and the equator keep symmetric data symmetric.
    t->sin.front() = t->sin.back() = 0.0;
    t->cos.front() = 1.0;
    t->cos.back() = -1.0;
    if (intervals % 2 == 0) {
      t->sin[n / 2] = 1.0;
      t->cos[n / 2] = 0.0;
      t->cot[n / 2] = 0.0;
    }
    cached = std::move(t);
  }
  return *cached;
}

}  // namespace

AxiSurface::AxiSurface(std::vector<double> values) : h_(std::move(values)) {
  if (h_.size() < 5) {
    throw Error(ErrorKind::InvalidSurface, "axisymmetric surface needs at least 4 intervals");
  }
  for (double v : h_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidSurface, "support values must be positive and finite");
    }
  }
}

AxiSurface AxiSurface::from_function(int intervals, const std::function<double(double)>& h) {
  if (intervals < 4) throw Error(ErrorKind::InvalidSurface, "need at least 4 intervals");
  std::vector<double> values(static_cast<std::size_t>(intervals) + 1);
  for (int j = 0; j <= intervals; ++j) {
    values[static_cast<std::size_t>(j)] = h(j * std::numbers::pi / intervals);
  }
  return AxiSurface(std::move(values));
}

double AxiSurface::spacing() const { return std::numbers::pi / intervals(); }

std::vector<double> AxiSurface::grid() const {
  std::vector<double> g;
  g.reserve(h_.size() - 2);
  for (int j = 1; j < intervals(); ++j) g.push_back(theta(j));
  return g;
}

double AxiSurface::derivative(int j) const {
  if (j == 0 || j == intervals()) return 0.0;
  const auto i = static_cast<std::size_t>(j);
  return (h_[i + 1] - h_[i - 1]) / (2.0 * spacing());
}

std::pair<double, double> AxiSurface::radii(int j) const {
  const double d2 = spacing() * spacing();
  const auto i = static_cast<std::size_t>(j);
  if (j == 0 || j == intervals()) {
    // Ghost node by even reflection: h(-dtheta) = h(dtheta).
    const double inner = j == 0 ? h_[1] : h_[i - 1];
    const double r = 2.0 * (inner - h_[i]) / d2 + h_[i];
    return {r, r};
  }
  const double second = (h_[i + 1] - 2.0 * h_[i] + h_[i - 1]) / d2;
  const double meridian = second + h_[i];
  const double parallel = derivative(j) * grid_trig(intervals()).cot[i] + h_[i];
  return {meridian, parallel};
}

std::pair<double, double> AxiSurface::profile_point(int j) const {
  const auto i = static_cast<std::size_t>(j);
  if (j == 0) return {0.0, h_[i]};
  if (j == intervals()) return {0.0, -h_[i]};
  const auto& trig = grid_trig(intervals());
  const double sn = trig.sin[i];
  const double cs = trig.cos[i];
  const double d = derivative(j);
  return {h_[i] * sn + d * cs, h_[i] * cs - d * sn};
}

AxiSurface AxiSurface::translated(double dz) const {
  std::vector<double> v(h_);
  for (int j = 0; j <= intervals(); ++j) v[static_cast<std::size_t>(j)] += dz * std::cos(theta(j));
  v.front() = h_.front() + dz;
  v.back() = h_.back() - dz;
  return AxiSurface(std::move(v));
}

AxiSurface AxiSurface::subsampled(int stride) const {
  if (stride < 1 || intervals() % stride != 0 || intervals() / stride < 4) {
    throw Error(ErrorKind::InvalidArgument, "subsample stride must divide the interval count");
  }
  std::vector<double> v;
  for (int j = 0; j <= intervals(); j += stride) v.push_back(h_[static_cast<std::size_t>(j)]);
  return AxiSurface(std::move(v));
}

AxiSurface sphere_axi(int intervals, double radius) {
  return AxiSurface::from_function(intervals, [radius](double) { return radius; });
}

AxiSurface spheroid_axi(int intervals, double a, double c) {
  return AxiSurface::from_function(intervals, [a, c](double th) {
    const double s = std::sin(th);
    const double co = std::cos(th);
    return std::sqrt(a * a * s * s + c * c * co * co);
  });
}

double CurvatureField::min_curvature() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : points) m = std::min(m, p.k_min);
  return m;
}

CurvatureField curvatures_axi(const AxiSurface& surface) {
  CurvatureField field;
  field.points.resize(static_cast<std::size_t>(surface.intervals()) + 1);
  const auto& trig = grid_trig(surface.intervals());
  for (int j = 0; j <= surface.intervals(); ++j) {
    const auto [r1, r2] = surface.radii(j);
    if (!(r1 > 0.0) || !(r2 > 0.0)) {
      throw Error(ErrorKind::ConvexityLost, "non-positive principal radius at node " +
                                                std::to_string(j) + " (theta = " +
                                                std::to_string(surface.theta(j)) + ")");
    }
    auto& p = field.points[static_cast<std::size_t>(j)];
    p.k_min = std::min(1.0 / r1, 1.0 / r2);
    p.k_max = std::max(1.0 / r1, 1.0 / r2);
    p.mean = p.k_min + p.k_max;
    p.normal = -Vec3(trig.sin[static_cast<std::size_t>(j)], 0.0, trig.cos[static_cast<std::size_t>(j)]);
    if (j == 0) p.normal = Vec3(0, 0, -1);
    if (j == surface.intervals()) p.normal = Vec3(0, 0, 1);
  }
  return field;
}

std::vector<Vec3> inward_vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> normals(static_cast<std::size_t>(mesh.vertex_count()), Vec3::Zero());
  for (int f = 0; f < mesh.triangle_count(); ++f) {
    const auto& t = mesh.triangle(f);
    // |cross| = 2 * area, so this is the area weighting.
    const Vec3 n = (mesh.vertex(t[1]) - mesh.vertex(t[0])).cross(mesh.vertex(t[2]) - mesh.vertex(t[0]));
    for (int v : t) normals[static_cast<std::size_t>(v)] -= n;
  }
  for (auto& n : normals) n.normalize();
  return normals;
}

namespace {

void collect_ring(const TriMesh& mesh, int center, int depth, std::vector<int>& stamp,
                  int token, std::vector<int>& out) {
  out.clear();
  stamp[static_cast<std::size_t>(center)] = token;
  std::vector<int> frontier{center};
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int w : mesh.vertex_neighbors(v)) {
        if (stamp[static_cast<std::size_t>(w)] == token) continue;
        stamp[static_cast<std::size_t>(w)] = token;
        next.push_back(w);
        out.push_back(w);
      }
    }
    frontier = std::move(next);
  }
}

}  // namespace

CurvatureField curvatures_mesh(const TriMesh& mesh, int ring_depth) {
  if (ring_depth < 1) throw Error(ErrorKind::InvalidArgument, "ring_depth must be >= 1");
  const auto normals = inward_vertex_normals(mesh);
  CurvatureField field;
  field.points.resize(static_cast<std::size_t>(mesh.vertex_count()));
  std::vector<int> stamp(static_cast<std::size_t>(mesh.vertex_count()), -1);
  std::vector<int> ring;

  for (int v = 0; v < mesh.vertex_count(); ++v) {
    collect_ring(mesh, v, ring_depth, stamp, v, ring);
    if (ring.size() < 5) {
      throw Error(ErrorKind::FitRankDeficient,
                  "vertex " + std::to_string(v) + " has fewer than 5 neighbours");
    }
    const Vec3& p = mesh.vertex(v);
    const Vec3& n = normals[static_cast<std::size_t>(v)];
    const Vec3 u = n.unitOrthogonal();
    const Vec3 w = n.cross(u);

    double rho = 0.0;
    for (int q : ring) rho = std::max(rho, (mesh.vertex(q) - p).norm());

    // z = a x^2 + b x y + c y^2 + d x + e y in coordinates scaled by rho.
    Eigen::MatrixXd design(static_cast<Eigen::Index>(ring.size()), 5);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(ring.size()));
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Vec3 d = (mesh.vertex(ring[i]) - p) / rho;
      const double x = d.dot(u);
      const double y = d.dot(w);
      const auto r = static_cast<Eigen::Index>(i);
      design.row(r) << x * x, x * y, y * y, x, y;
      rhs(r) = d.dot(n);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 5) {
      throw Error(ErrorKind::FitRankDeficient,
                  "neighbourhood of vertex " + std::to_string(v) + " does not span a quadric");
    }
    const Eigen::VectorXd c = qr.solve(rhs);
    if (std::max({std::abs(c(0)), std::abs(c(1)), std::abs(c(2))}) < 1e-9) {
      throw Error(ErrorKind::FitRankDeficient,
                  "flat neighbourhood at vertex " + std::to_string(v));
    }
    const double fx = c(3);
    const double fy = c(4);
    const double g = std::sqrt(1.0 + fx * fx + fy * fy);
    Eigen::Matrix2d first;
    first << 1.0 + fx * fx, fx * fy, fx * fy, 1.0 + fy * fy;
    Eigen::Matrix2d second;
    second << 2.0 * c(0), c(1), c(1), 2.0 * c(2);
    second /= g * rho;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> eig(second, first);
    auto& out = field.points[static_cast<std::size_t>(v)];
    out.k_min = eig.eigenvalues()(0);
    out.k_max = eig.eigenvalues()(1);
    out.mean = std::abs(out.k_min + out.k_max);
    out.normal = n;
  }
  return field;
}

TriMesh axi_to_mesh(const AxiSurface& surface, int azimuth_count) {
  if (azimuth_count < 8) throw Error(ErrorKind::InvalidArgument, "azimuth_count must be >= 8");
  const int rings = surface.intervals() - 1;
  const int a_count = azimuth_count;
  std::vector<Vec3> verts;
  verts.reserve(static_cast<std::size_t>(rings * a_count + 2));
  verts.emplace_back(0.0, 0.0, surface.profile_point(0).second);
  for (int j = 1; j <= rings; ++j) {
    const auto [rho, z] = surface.profile_point(j);
    for (int a = 0; a < a_count; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / a_count;
      verts.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
    }
  }
  verts.emplace_back(0.0, 0.0, surface.profile_point(surface.intervals()).second);
  const int north = 0;
  const int south = static_cast<int>(verts.size()) - 1;
  auto id = [a_count](int ring, int a) { return 1 + (ring - 1) * a_count + (a % a_count); };

  std::vector<Triangle> tris;
  tris.reserve(static_cast<std::size_t>(2 * rings * a_count));
  for (int a = 0; a < a_count; ++a) tris.push_back({north, id(1, a), id(1, a + 1)});
  for (int j = 1; j < rings; ++j) {
    for (int a = 0; a < a_count; ++a) {
      tris.push_back({id(j, a), id(j + 1, a), id(j + 1, a + 1)});
      tris.push_back({id(j, a), id(j + 1, a + 1), id(j, a + 1)});
    }
  }
  for (int a = 0; a < a_count; ++a) tris.push_back({south, id(rings, a + 1), id(rings, a)});
  return TriMesh(std::move(verts), std::move(tris));
}

double pinching_ratio(const CurvatureField& field, const SpeedSpec& spec) {
  if (spec.n() != 2) {
    throw Error(ErrorKind::DimensionMismatch, "surface curvature fields have n = 2");
  }
  double sup = 0.0;
  for (const auto& p : field.points) {
    const double lambda[2] = {p.k_min, p.k_max};
    const double f = evaluate(spec, lambda);
    sup = std::max(sup, p.mean / (2.0 * f));
  }
  return sup;
}

double axial_centroid(const AxiSurface& surface) {
  double volume = 0.0;
  double moment = 0.0;
  auto [ra, za] = surface.profile_point(0);
  for (int j = 0; j < surface.intervals(); ++j) {
    const auto [rb, zb] = surface.profile_point(j + 1);
    // Frustum between heights zb (radius rb) and za (radius ra).
    const double height = za - zb;
    const double dr = ra - rb;
    const double v = std::numbers::pi * height * (rb * rb + rb * dr + dr * dr / 3.0);
    const double m = std::numbers::pi * height * height *
                     (rb * rb / 2.0 + 2.0 * rb * dr / 3.0 + dr * dr / 4.0);
    volume += v;
    moment += v * zb + m;
    ra = rb;
    za = zb;
  }
  return moment / volume;
}

double inradius(const AxiSurface& surface) {
  const double zc = axial_centroid(surface);
  const auto& trig = grid_trig(surface.intervals());
  double r = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= surface.intervals(); ++j) {
    r = std::min(r, surface.h(j) - zc * trig.cos[static_cast<std::size_t>(j)]);
  }
  r = std::min({r, surface.h(0) - zc, surface.h(surface.intervals()) + zc});
  if (!(r > 0.0)) throw Error(ErrorKind::CentroidOutside, "centroid outside the body");
  return r;
}

double inradius(const TriMesh& mesh) {
  const Vec3 c = mesh.centroid();
  double r = std::numeric_limits<double>::infinity();
  for (int f = 0; f < mesh.triangle_count(); ++f) {
    r = std::min(r, (mesh.vertex(mesh.triangle(f)[0]) - c).dot(mesh.face_normal(f)));
  }
  if (!(r > 0.0)) throw Error(ErrorKind::CentroidOutside, "centroid outside the mesh");
  return r;
}

}  // namespace widthflow
