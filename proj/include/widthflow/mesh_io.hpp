#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>

#include "widthflow/geom.hpp"
#include "widthflow/tri_mesh.hpp"

namespace widthflow {

// ASCII OFF and OBJ. Readers throw ParseError on malformed input and
// InvalidSurface when the parsed mesh violates TriMesh invariants; polygons
// with more than three vertices are fan-triangulated.
TriMesh read_off(std::istream& in);
TriMesh read_obj(std::istream& in);
void write_off(std::ostream& out, const TriMesh& mesh);
void write_obj(std::ostream& out, const TriMesh& mesh);

// Dispatches on the extension (.off / .obj).
TriMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriMesh& mesh);

// Two-column CSV "theta,h" covering both poles.
AxiSurface read_axi_csv(std::istream& in);
void write_axi_csv(std::ostream& out, const AxiSurface& surface);
AxiSurface read_axi_csv(const std::filesystem::path& path);

// Closed polyline as OBJ "l" element.
void write_polyline_obj(std::ostream& out, std::span<const Vec3> points, bool closed = true);

}  // namespace widthflow
