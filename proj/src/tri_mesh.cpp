#include "widthflow/tri_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "widthflow/error.hpp"

namespace widthflow {

namespace {

std::vector<int> csr_offsets(const std::vector<std::vector<int>>& lists,
                             std::vector<int>& flat) {
  std::vector<int> offsets(lists.size() + 1, 0);
  for (std::size_t i = 0; i < lists.size(); ++i) {
    offsets[i + 1] = offsets[i] + static_cast<int>(lists[i].size());
  }
  flat.clear();
  flat.reserve(static_cast<std::size_t>(offsets.back()));
  for (const auto& l : lists) flat.insert(flat.end(), l.begin(), l.end());
  return offsets;
}

}  // namespace

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)) {
  const int nv = static_cast<int>(vertices_.size());
  if (nv < 4 || triangles.size() < 4) {
    throw Error(ErrorKind::InvalidSurface, "mesh needs at least 4 vertices and 4 triangles");
  }
  auto topo = std::make_shared<Topology>();
  topo->triangles = std::move(triangles);
  const auto& tris = topo->triangles;

  // Directed edge -> (face, local edge). A closed oriented mesh has each
  // directed edge exactly once and its reverse exactly once.
  std::map<std::pair<int, int>, std::pair<int, int>> directed;
  std::vector<std::vector<int>> vf(static_cast<std::size_t>(nv));
  std::vector<std::vector<int>> vv(static_cast<std::size_t>(nv));
  for (int f = 0; f < static_cast<int>(tris.size()); ++f) {
    const auto& t = tris[static_cast<std::size_t>(f)];
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<std::size_t>(e)];
      const int b = t[static_cast<std::size_t>((e + 1) % 3)];
      if (a < 0 || a >= nv || b < 0 || b >= nv || a == b) {
        throw Error(ErrorKind::InvalidSurface,
                    "triangle " + std::to_string(f) + " has invalid vertex indices");
      }
      if (!directed.emplace(std::make_pair(a, b), std::make_pair(f, e)).second) {
        throw Error(ErrorKind::InvalidSurface, "edge (" + std::to_string(a) + "," +
                                                   std::to_string(b) +
                                                   ") repeated: mesh not oriented/manifold");
      }
      vf[static_cast<std::size_t>(a)].push_back(f);
      vv[static_cast<std::size_t>(a)].push_back(b);
    }
  }
  topo->adjacent.assign(tris.size(), {-1, -1, -1});
  for (const auto& [edge, where] : directed) {
    auto it = directed.find({edge.second, edge.first});
    if (it == directed.end()) {
      throw Error(ErrorKind::InvalidSurface, "open edge (" + std::to_string(edge.first) +
                                                 "," + std::to_string(edge.second) + ")");
    }
    topo->adjacent[static_cast<std::size_t>(where.first)]
                  [static_cast<std::size_t>(where.second)] = it->second.first;
  }
  for (int v = 0; v < nv; ++v) {
    auto& n = vv[static_cast<std::size_t>(v)];
    if (n.empty()) {
      throw Error(ErrorKind::InvalidSurface, "isolated vertex " + std::to_string(v));
    }
    std::sort(n.begin(), n.end());
  }
  topo->face_offsets = csr_offsets(vf, topo->faces);
  topo->neighbor_offsets = csr_offsets(vv, topo->neighbors);
  topo_ = std::move(topo);
  check_geometry();
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::shared_ptr<const Topology> topo)
    : vertices_(std::move(vertices)), topo_(std::move(topo)) {
  check_geometry();
}

TriMesh TriMesh::with_vertices(std::vector<Vec3> vertices) const {
  if (vertices.size() != vertices_.size()) {
    throw Error(ErrorKind::InvalidArgument, "with_vertices: vertex count changed");
  }
  return TriMesh(std::move(vertices), topo_);
}

void TriMesh::check_geometry() const {
  const double diag = bounding_box_diagonal();
  const double min_area = 1e-14 * diag * diag;
  for (int f = 0; f < triangle_count(); ++f) {
    if (!(face_area(f) > min_area)) {
      throw Error(ErrorKind::InvalidSurface, "degenerate triangle " + std::to_string(f));
    }
  }
  if (!(signed_volume() > 0.0)) {
    throw Error(ErrorKind::InvalidSurface, "mesh is not outward oriented");
  }
}

std::span<const int> TriMesh::vertex_faces(int v) const {
  const auto b = static_cast<std::size_t>(topo_->face_offsets[static_cast<std::size_t>(v)]);
  const auto e = static_cast<std::size_t>(topo_->face_offsets[static_cast<std::size_t>(v) + 1]);
  return std::span<const int>(topo_->faces).subspan(b, e - b);
}

std::span<const int> TriMesh::vertex_neighbors(int v) const {
  const auto b = static_cast<std::size_t>(topo_->neighbor_offsets[static_cast<std::size_t>(v)]);
  const auto e =
      static_cast<std::size_t>(topo_->neighbor_offsets[static_cast<std::size_t>(v) + 1]);
  return std::span<const int>(topo_->neighbors).subspan(b, e - b);
}

Vec3 TriMesh::face_normal(int f) const {
  const auto& t = triangle(f);
  const Vec3 n = (vertex(t[1]) - vertex(t[0])).cross(vertex(t[2]) - vertex(t[0]));
  return n.normalized();
}

double TriMesh::face_area(int f) const {
  const auto& t = triangle(f);
  return 0.5 * (vertex(t[1]) - vertex(t[0])).cross(vertex(t[2]) - vertex(t[0])).norm();
}

Vec3 TriMesh::point(int f, const Vec3& bary) const {
  const auto& t = triangle(f);
  return bary[0] * vertex(t[0]) + bary[1] * vertex(t[1]) + bary[2] * vertex(t[2]);
}

double TriMesh::bounding_box_diagonal() const {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

double TriMesh::mean_edge_length() const {
  double sum = 0.0;
  for (const auto& t : triangles()) {
    for (int e = 0; e < 3; ++e) sum += (vertex(t[e]) - vertex(t[(e + 1) % 3])).norm();
  }
  return sum / (3.0 * triangle_count());
}

double TriMesh::min_edge_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : triangles()) {
    for (int e = 0; e < 3; ++e) m = std::min(m, (vertex(t[e]) - vertex(t[(e + 1) % 3])).norm());
  }
  return m;
}

double TriMesh::signed_volume() const {
  double vol = 0.0;
  for (const auto& t : triangles()) {
    vol += vertex(t[0]).dot(vertex(t[1]).cross(vertex(t[2])));
  }
  return vol / 6.0;
}

Vec3 TriMesh::centroid() const {
  // Tetrahedra against a local origin keep the sum well conditioned.
  const Vec3 origin = vertices_.front();
  double vol = 0.0;
  Vec3 moment = Vec3::Zero();
  for (const auto& t : triangles()) {
    const Vec3 a = vertex(t[0]) - origin;
    const Vec3 b = vertex(t[1]) - origin;
    const Vec3 c = vertex(t[2]) - origin;
    const double v = a.dot(b.cross(c)) / 6.0;
    vol += v;
    moment += v * (a + b + c) / 4.0;
  }
  return origin + moment / vol;
}

TriMesh icosphere(int subdivisions, double radius) {
  if (subdivisions < 0) throw Error(ErrorKind::InvalidArgument, "subdivisions must be >= 0");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                         {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                         {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<Triangle> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back((v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int ab = mid(t[0], t[1]);
      const int bc = mid(t[1], t[2]);
      const int ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v) p *= radius;
  return TriMesh(std::move(v), std::move(f));
}

TriMesh ellipsoid_mesh(int subdivisions, double a, double b, double c) {
  const TriMesh sphere = icosphere(subdivisions, 1.0);
  std::vector<Vec3> v(sphere.vertices().begin(), sphere.vertices().end());
  for (auto& p : v) p = Vec3(a * p.x(), b * p.y(), c * p.z());
  return sphere.with_vertices(std::move(v));
}

TriMesh translated(const TriMesh& mesh, const Vec3& offset) {
  std::vector<Vec3> v(mesh.vertices().begin(), mesh.vertices().end());
  for (auto& p : v) p += offset;
  return mesh.with_vertices(std::move(v));
}

TriMesh scaled(const TriMesh& mesh, double factor) {
  std::vector<Vec3> v(mesh.vertices().begin(), mesh.vertices().end());
  for (auto& p : v) p *= factor;
  return mesh.with_vertices(std::move(v));
}

}  // namespace widthflow
