#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace widthflow {

using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

// Closed, consistently oriented (outward) triangle mesh. Connectivity is
// shared between meshes produced by with_vertices(), so moving vertices is
// cheap.
class TriMesh {
 public:
  // Throws InvalidSurface if the mesh is not closed, not consistently
  // oriented, has inward orientation or has degenerate triangles.
  TriMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  // Same connectivity, new positions. Re-checks degeneracy and orientation.
  TriMesh with_vertices(std::vector<Vec3> vertices) const;

  std::span<const Vec3> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return topo_->triangles; }
  const Vec3& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
  const Triangle& triangle(int f) const { return topo_->triangles[static_cast<std::size_t>(f)]; }
  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(topo_->triangles.size()); }

  // Faces incident to vertex v.
  std::span<const int> vertex_faces(int v) const;
  // Vertices sharing an edge with v.
  std::span<const int> vertex_neighbors(int v) const;
  // Face across edge (t[e], t[(e+1)%3]) of face f.
  int adjacent_face(int f, int e) const { return topo_->adjacent[static_cast<std::size_t>(f)][static_cast<std::size_t>(e)]; }

  Vec3 face_normal(int f) const;  // unit, outward
  double face_area(int f) const;
  Vec3 point(int f, const Vec3& bary) const;

  double bounding_box_diagonal() const;
  double mean_edge_length() const;
  double min_edge_length() const;
  double signed_volume() const;
  // Centroid of the enclosed solid.
  Vec3 centroid() const;

 private:
  struct Topology {
    std::vector<Triangle> triangles;
    std::vector<int> face_offsets, faces;          // vertex -> faces (CSR)
    std::vector<int> neighbor_offsets, neighbors;  // vertex -> vertices (CSR)
    std::vector<std::array<int, 3>> adjacent;
  };

  TriMesh(std::vector<Vec3> vertices, std::shared_ptr<const Topology> topo);
  void check_geometry() const;

  std::vector<Vec3> vertices_;
  std::shared_ptr<const Topology> topo_;
};

// Geodesic-polyhedron sphere: icosahedron refined `subdivisions` times with
// vertices pushed to the sphere.
TriMesh icosphere(int subdivisions, double radius = 1.0);
// Icosphere scaled by the semi-axes (a, b, c).
TriMesh ellipsoid_mesh(int subdivisions, double a, double b, double c);
TriMesh translated(const TriMesh& mesh, const Vec3& offset);
TriMesh scaled(const TriMesh& mesh, double factor);

}  // namespace widthflow
