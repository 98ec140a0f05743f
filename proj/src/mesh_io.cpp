#include "widthflow/mesh_io.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "widthflow/error.hpp"

namespace widthflow {

namespace {

// Next line that is neither blank nor a comment.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos || line[pos] == '#') continue;
    return true;
  }
  return false;
}

void fan(const std::vector<int>& poly, std::vector<Triangle>& tris) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) tris.push_back({poly[0], poly[i], poly[i + 1]});
}

std::ostream& precise(std::ostream& out) {
  out.precision(17);
  return out;
}

}  // namespace

TriMesh read_off(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line)) throw Error(ErrorKind::ParseError, "empty OFF input");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw Error(ErrorKind::ParseError, "missing OFF header");
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv >> nf >> ne)) {
    if (!next_content_line(in, line)) throw Error(ErrorKind::ParseError, "missing OFF counts");
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) throw Error(ErrorKind::ParseError, "bad OFF counts");
  }
  if (nv < 0 || nf < 0) throw Error(ErrorKind::ParseError, "negative OFF counts");
  std::vector<Vec3> verts;
  verts.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line)) throw Error(ErrorKind::ParseError, "truncated OFF vertices");
    std::istringstream s(line);
    double x, y, z;
    if (!(s >> x >> y >> z)) throw Error(ErrorKind::ParseError, "bad OFF vertex: " + line);
    verts.emplace_back(x, y, z);
  }
  std::vector<Triangle> tris;
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line)) throw Error(ErrorKind::ParseError, "truncated OFF faces");
    std::istringstream s(line);
    int count = 0;
    if (!(s >> count) || count < 3) throw Error(ErrorKind::ParseError, "bad OFF face: " + line);
    std::vector<int> poly(static_cast<std::size_t>(count));
    for (auto& idx : poly) {
      if (!(s >> idx)) throw Error(ErrorKind::ParseError, "bad OFF face: " + line);
    }
    fan(poly, tris);
  }
  return TriMesh(std::move(verts), std::move(tris));
}

TriMesh read_obj(std::istream& in) {
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  std::string line;
  while (next_content_line(in, line)) {
    std::istringstream s(line);
    std::string tag;
    s >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(s >> x >> y >> z)) throw Error(ErrorKind::ParseError, "bad OBJ vertex: " + line);
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      while (s >> token) {
        // "i", "i/t", "i/t/n" or "i//n"; negative indices are relative.
        const auto slash = token.find('/');
        int idx = 0;
        try {
          idx = std::stoi(token.substr(0, slash));
        } catch (const std::exception&) {
          throw Error(ErrorKind::ParseError, "bad OBJ face index: " + token);
        }
        poly.push_back(idx > 0 ? idx - 1 : static_cast<int>(verts.size()) + idx);
      }
      if (poly.size() < 3) throw Error(ErrorKind::ParseError, "OBJ face with < 3 vertices");
      fan(poly, tris);
    }
  }
  if (verts.empty()) throw Error(ErrorKind::ParseError, "OBJ input has no vertices");
  return TriMesh(std::move(verts), std::move(tris));
}

void write_off(std::ostream& out, const TriMesh& mesh) {
  precise(out) << "OFF\n" << mesh.vertex_count() << ' ' << mesh.triangle_count() << " 0\n";
  for (const auto& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
  precise(out);
  for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles()) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

TriMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open mesh file " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".off" || ext == ".OFF") return read_off(in);
  if (ext == ".obj" || ext == ".OBJ") return read_obj(in);
  throw Error(ErrorKind::ParseError, "unsupported mesh extension '" + ext + "'");
}

void write_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  if (path.extension() == ".obj") {
    write_obj(out, mesh);
  } else {
    write_off(out, mesh);
  }
}

AxiSurface read_axi_csv(std::istream& in) {
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool first = true;
  while (next_content_line(in, line)) {
    std::istringstream s(line);
    double th = 0.0, h = 0.0;
    char comma = 0;
    const bool ok = static_cast<bool>(s >> th >> comma >> h) && comma == ',';
    if (!ok && first) {
      first = false;  // header row such as "theta,h"
      continue;
    }
    first = false;
    if (!ok) throw Error(ErrorKind::ParseError, "bad axisymmetric CSV row: " + line);
    rows.emplace_back(th, h);
  }
  if (rows.size() < 5) throw Error(ErrorKind::ParseError, "axisymmetric CSV needs >= 5 rows");
  const double spacing = std::numbers::pi / static_cast<double>(rows.size() - 1);
  std::vector<double> values;
  values.reserve(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (std::abs(rows[j].first - static_cast<double>(j) * spacing) > 1e-9) {
      throw Error(ErrorKind::ParseError, "theta column must be the uniform grid j*pi/N");
    }
    values.push_back(rows[j].second);
  }
  return AxiSurface(std::move(values));
}

AxiSurface read_axi_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  return read_axi_csv(in);
}

void write_axi_csv(std::ostream& out, const AxiSurface& surface) {
  precise(out) << "theta,h\n";
  for (int j = 0; j <= surface.intervals(); ++j) out << surface.theta(j) << ',' << surface.h(j) << '\n';
}

void write_polyline_obj(std::ostream& out, std::span<const Vec3> points, bool closed) {
  precise(out);
  for (const auto& p : points) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  if (points.empty()) return;
  out << 'l';
  for (std::size_t i = 0; i < points.size(); ++i) out << ' ' << i + 1;
  if (closed && points.size() > 1) out << " 1";
  out << '\n';
}

}  // namespace widthflow
