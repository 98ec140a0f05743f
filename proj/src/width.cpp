#include "widthflow/width.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>

#include "widthflow/error.hpp"
#include "widthflow/random.hpp"

namespace widthflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Neumaier-compensated sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Barycentric coordinates of x projected into the plane of (a, b, c).
Vec3 barycentric(const Vec3& x, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double area2 = n.squaredNorm();
  const double wa = (c - b).cross(x - b).dot(n) / area2;
  const double wb = (a - c).cross(x - c).dot(n) / area2;
  return Vec3(wa, wb, 1.0 - wa - wb);
}

Vec3 clamp_bary(Vec3 b) {
  b = b.cwiseMax(0.0);
  const double s = b.sum();
  return s > 0.0 ? Vec3(b / s) : Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3);
}

// Closest point on triangle (a, b, c) to p, as barycentric coordinates
// (region tests after Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_bary(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {1, 0, 0};
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {0, 1, 0};
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {1 - v, v, 0};
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {0, 0, 1};
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {1 - w, 0, w};
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {0, 1 - w, w};
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return {1 - v - w, v, w};
}

}  // namespace

double curve_length(const SurfaceCurve& c) {
  if (c.is_degenerate || c.points.size() < 2) return 0.0;
  Accumulator acc;
  const std::size_t m = c.points.size();
  for (std::size_t i = 0; i < m; ++i) {
    acc.add((c.points[(i + 1) % m].position - c.points[i].position).norm());
  }
  return acc.value();
}

double curve_energy(const SurfaceCurve& c) {
  const double l = curve_length(c);
  return l * l / kTwoPi;
}

double total_curvature(const SurfaceCurve& c) {
  if (c.is_degenerate || c.points.size() < 3) return 0.0;
  const std::size_t m = c.points.size();
  Accumulator acc;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3 u = c.points[i].position - c.points[(i + m - 1) % m].position;
    const Vec3 v = c.points[(i + 1) % m].position - c.points[i].position;
    acc.add(std::atan2(u.cross(v).norm(), u.dot(v)));
  }
  return acc.value();
}

std::vector<Vec3> curve_positions(const SurfaceCurve& c) {
  std::vector<Vec3> out;
  out.reserve(c.points.size());
  for (const auto& p : c.points) out.push_back(p.position);
  return out;
}

MeshLocator::MeshLocator(TriMesh mesh) : mesh_(std::move(mesh)) {
  // Max's weights, exact when the vertices lie on a sphere.
  vertex_normals_.assign(static_cast<std::size_t>(mesh_.vertex_count()), Vec3::Zero());
  for (const auto& t : mesh_.triangles()) {
    for (int i = 0; i < 3; ++i) {
      const Vec3& x = mesh_.vertex(t[i]);
      const Vec3 e1 = mesh_.vertex(t[(i + 1) % 3]) - x;
      const Vec3 e2 = mesh_.vertex(t[(i + 2) % 3]) - x;
      vertex_normals_[static_cast<std::size_t>(t[i])] +=
          e1.cross(e2) / (e1.squaredNorm() * e2.squaredNorm());
    }
  }
  for (auto& n : vertex_normals_) n.normalize();
  diag_ = mesh_.bounding_box_diagonal();
  mean_edge_ = mesh_.mean_edge_length();
}

SurfacePoint MeshLocator::make_point(int face, const Vec3& bary) const {
  // Phong tessellation with shape factor 1/2: the flat point is pulled
  // toward the vertex tangent planes, which reproduces a sphere to fourth
  // order in the edge length.
  const auto& t = mesh_.triangle(face);
  const Vec3 flat = mesh_.point(face, bary);
  Vec3 x = flat;
  for (int i = 0; i < 3; ++i) {
    const Vec3& n = vertex_normals_[static_cast<std::size_t>(t[i])];
    x -= 0.5 * bary[i] * (flat - mesh_.vertex(t[i])).dot(n) * n;
  }
  return SurfacePoint{face, bary, x};
}

Vec3 MeshLocator::smooth_normal(const SurfacePoint& sp) const {
  const auto& t = mesh_.triangle(sp.face);
  const Vec3 n = sp.bary[0] * vertex_normals_[static_cast<std::size_t>(t[0])] +
                 sp.bary[1] * vertex_normals_[static_cast<std::size_t>(t[1])] +
                 sp.bary[2] * vertex_normals_[static_cast<std::size_t>(t[2])];
  return n.normalized();
}

SurfacePoint MeshLocator::closest_in_face(const Vec3& p, int face) const {
  const auto& t = mesh_.triangle(face);
  const Vec3 b = closest_bary(p, mesh_.vertex(t[0]), mesh_.vertex(t[1]), mesh_.vertex(t[2]));
  return make_point(face, b);
}

SurfacePoint MeshLocator::closest(const Vec3& p, int hint) const {
  auto global = [&] {
    SurfacePoint best = closest_in_face(p, 0);
    double bd = (best.position - p).squaredNorm();
    for (int f = 1; f < mesh_.triangle_count(); ++f) {
      const auto c = closest_in_face(p, f);
      const double d = (c.position - p).squaredNorm();
      if (d < bd) {
        bd = d;
        best = c;
      }
    }
    return best;
  };
  if (hint < 0 || hint >= mesh_.triangle_count()) return global();

  SurfacePoint best = closest_in_face(p, hint);
  double bd = (best.position - p).squaredNorm();
  for (int iter = 0; iter < 256; ++iter) {
    const SurfacePoint start = best;
    for (int v : mesh_.triangle(start.face)) {
      for (int g : mesh_.vertex_faces(v)) {
        if (g == start.face) continue;
        const auto c = closest_in_face(p, g);
        const double d = (c.position - p).squaredNorm();
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
    }
    if (best.face == start.face) break;
  }
  // A walk can stall on the far side of a thin body; a distance well above
  // the edge length is suspicious enough to pay for a full scan.
  if (std::sqrt(bd) > 2.0 * mean_edge_) {
    const auto g = global();
    if ((g.position - p).squaredNorm() < bd) return g;
  }
  return best;
}

bool MeshLocator::ray_walk(const Vec3& p, const Vec3& dir, int face, SurfacePoint& out) const {
  int f = face;
  for (int iter = 0; iter < 64; ++iter) {
    const auto& t = mesh_.triangle(f);
    const Vec3& a = mesh_.vertex(t[0]);
    const Vec3& b = mesh_.vertex(t[1]);
    const Vec3& c = mesh_.vertex(t[2]);
    const Vec3 n = (b - a).cross(c - a);
    const double denom = dir.dot(n);
    if (std::abs(denom) < 0.2 * n.norm()) return false;  // grazing
    const Vec3 y = p + ((a - p).dot(n) / denom) * dir;
    const Vec3 w = barycentric(y, a, b, c);
    int k = 0;
    w.minCoeff(&k);
    if (w[k] >= -1e-12) {
      out = make_point(f, clamp_bary(w));
      return true;
    }
    // Negative weight at vertex k: step across the opposite edge.
    f = mesh_.adjacent_face(f, (k + 1) % 3);
  }
  return false;
}

SurfacePoint MeshLocator::project(const Vec3& p, int hint) const {
  if (!p.allFinite()) throw Error(ErrorKind::ProjectionFailed, "non-finite point");
  return project_from(p, closest(p, hint));
}

SurfacePoint MeshLocator::project(const Vec3& p, const SurfacePoint& start) const {
  if (!p.allFinite()) throw Error(ErrorKind::ProjectionFailed, "non-finite point");
  return project_from(p, start);
}

SurfacePoint MeshLocator::project_from(const Vec3& p, SurfacePoint sp) const {
  // Fixed point of "move along the normal at the landing point". The walk
  // runs on the flat faces, so the ray is shifted by the local offset of
  // the curved surface from its face.
  bool walked = false;
  for (int it = 0; it < 4; ++it) {
    const Vec3 offset = sp.position - mesh_.point(sp.face, sp.bary);
    SurfacePoint q;
    if (!ray_walk(p - offset, smooth_normal(sp), sp.face, q)) {
      if (walked) break;
      // Far from the start; restart from the closest point.
      sp = closest(p, sp.face);
      walked = true;
      continue;
    }
    walked = true;
    const bool settled = (q.position - sp.position).norm() <= 1e-14 * diag_;
    sp = q;
    if (settled) break;
  }
  if (!((sp.position - p).norm() <= 0.05 * diag_)) {
    throw Error(ErrorKind::ProjectionFailed,
                "point is " + std::to_string((sp.position - p).norm()) + " away from the mesh");
  }
  return sp;
}

SurfaceCurve plane_section(const MeshLocator& locator, const Vec3& normal, double offset,
                           double spacing) {
  const TriMesh& mesh = locator.mesh();
  const double diag = locator.bounding_box_diagonal();
  if (spacing <= 0.0) spacing = 2.0 * locator.mean_edge_length();
  const Vec3 n = normal.normalized();

  // Keep vertices off the plane so every crossing is a proper edge crossing.
  std::vector<double> d(static_cast<std::size_t>(mesh.vertex_count()));
  for (int attempt = 0;; ++attempt) {
    bool touching = false;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      d[static_cast<std::size_t>(v)] = mesh.vertex(v).dot(n) - offset;
      touching = touching || std::abs(d[static_cast<std::size_t>(v)]) < 1e-12 * diag;
    }
    if (!touching || attempt == 8) break;
    offset += 1e-9 * diag;
  }
  auto above = [&](int v) { return d[static_cast<std::size_t>(v)] >= 0.0; };
  // Local edge leaving the upper side, in face orientation order.
  auto exit_edge = [&](int f) {
    const auto& t = mesh.triangle(f);
    for (int e = 0; e < 3; ++e) {
      if (above(t[e]) && !above(t[(e + 1) % 3])) return e;
    }
    return -1;
  };

  int start = -1;
  for (int f = 0; f < mesh.triangle_count() && start < 0; ++f) {
    if (exit_edge(f) >= 0) start = f;
  }
  if (start < 0) throw Error(ErrorKind::EmptySlice, "plane misses the mesh");

  // Raw polygon: crossing k lies on the edge into seg_face[k], and segment
  // k (to crossing k+1) lies inside seg_face[k].
  std::vector<Vec3> raw;
  std::vector<int> seg_face;
  int f = start;
  do {
    const int e = exit_edge(f);
    if (e < 0) throw Error(ErrorKind::EmptySlice, "section is not a closed loop");
    const auto& t = mesh.triangle(f);
    const int a = t[e];
    const int b = t[(e + 1) % 3];
    const double s = d[static_cast<std::size_t>(a)] /
                     (d[static_cast<std::size_t>(a)] - d[static_cast<std::size_t>(b)]);
    raw.push_back(mesh.vertex(a) + s * (mesh.vertex(b) - mesh.vertex(a)));
    f = mesh.adjacent_face(f, e);
    seg_face.push_back(f);
    if (raw.size() > static_cast<std::size_t>(mesh.triangle_count())) {
      throw Error(ErrorKind::EmptySlice, "section walk did not close");
    }
  } while (f != start);

  std::vector<double> seg_len(raw.size());
  double total = 0.0;
  for (std::size_t k = 0; k < raw.size(); ++k) {
    seg_len[k] = (raw[(k + 1) % raw.size()] - raw[k]).norm();
    total += seg_len[k];
  }

  SurfaceCurve curve;
  auto point_in = [&](int face, const Vec3& x) {
    const auto& t = mesh.triangle(face);
    const Vec3 w = barycentric(x, mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    return locator.make_point(face, clamp_bary(w));
  };
  if (total < 1e-3 * diag || raw.size() < 3) {
    curve.points.push_back(point_in(seg_face[0], raw[0]));
    curve.is_degenerate = true;
    return curve;
  }
  const int m = std::max(6, static_cast<int>(std::lround(total / spacing)));
  const double step = total / m;
  std::size_t k = 0;
  double walked = 0.0;  // arc length at raw[k]
  for (int j = 0; j < m; ++j) {
    const double target = j * step;
    while (k + 1 < raw.size() && walked + seg_len[k] < target) {
      walked += seg_len[k];
      ++k;
    }
    const double u = seg_len[k] > 0.0 ? std::clamp((target - walked) / seg_len[k], 0.0, 1.0) : 0.0;
    const Vec3 x = raw[k] + u * (raw[(k + 1) % raw.size()] - raw[k]);
    curve.points.push_back(point_in(seg_face[k], x));
  }
  return curve;
}

namespace {

Sweepout build_sweepout_with(const MeshLocator& locator, const Vec3& axis, int slice_count,
                             double spacing) {
  if (slice_count < 8) throw Error(ErrorKind::InvalidArgument, "slice_count must be >= 8");
  if (!(axis.norm() > 0.0)) throw Error(ErrorKind::InvalidArgument, "axis must be non-zero");
  const TriMesh& mesh = locator.mesh();
  Sweepout sw;
  sw.axis = axis.normalized();
  int lo_v = 0;
  int hi_v = 0;
  for (int v = 1; v < mesh.vertex_count(); ++v) {
    if (mesh.vertex(v).dot(sw.axis) < mesh.vertex(lo_v).dot(sw.axis)) lo_v = v;
    if (mesh.vertex(v).dot(sw.axis) > mesh.vertex(hi_v).dot(sw.axis)) hi_v = v;
  }
  const double lo = mesh.vertex(lo_v).dot(sw.axis);
  const double hi = mesh.vertex(hi_v).dot(sw.axis);
  auto vertex_point = [&](int v) {
    const int f = mesh.vertex_faces(v)[0];
    const auto& t = mesh.triangle(f);
    Vec3 b = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      if (t[static_cast<std::size_t>(i)] == v) b[i] = 1.0;
    }
    SurfaceCurve c;
    c.points.push_back(locator.make_point(f, b));
    c.is_degenerate = true;
    return c;
  };
  for (int i = 0; i < slice_count; ++i) {
    const double s = static_cast<double>(i) / (slice_count - 1);
    sw.params.push_back(-1.0 + 2.0 * s);
    if (i == 0) {
      sw.slices.push_back(vertex_point(lo_v));
    } else if (i == slice_count - 1) {
      sw.slices.push_back(vertex_point(hi_v));
    } else {
      sw.slices.push_back(plane_section(locator, sw.axis, lo + s * (hi - lo), spacing));
    }
  }
  return sw;
}

}  // namespace

Sweepout build_sweepout(const TriMesh& mesh, const Vec3& axis, int slice_count, double spacing) {
  return build_sweepout_with(MeshLocator(mesh), axis, slice_count, spacing);
}

SurfaceCurve birkhoff_tighten(const SurfaceCurve& c, const MeshLocator& locator, int sweeps,
                              std::vector<double>* lengths) {
  if (sweeps < 0) throw Error(ErrorKind::InvalidArgument, "sweeps must be >= 0");
  SurfaceCurve cur = c;
  if (cur.is_degenerate || cur.points.size() < 3) return cur;
  auto& p = cur.points;
  const std::size_t m = p.size();
  const double threshold = 1e-3 * locator.bounding_box_diagonal();
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t parity = 0; parity < 2; ++parity) {
      for (std::size_t i = parity; i < m; i += 2) {
        const Vec3& a = p[(i + m - 1) % m].position;
        const Vec3& b = p[(i + 1) % m].position;
        const SurfacePoint q = locator.project(0.5 * (a + b), p[i]);
        const double before = (a - p[i].position).norm() + (b - p[i].position).norm();
        const double after = (a - q.position).norm() + (b - q.position).norm();
        if (after < before * (1.0 - 1e-12)) p[i] = q;
      }
    }
    const double len = curve_length(cur);
    if (lengths) lengths->push_back(len);
    if (len < threshold) {
      cur.is_degenerate = true;
      break;
    }
  }
  return cur;
}

SurfaceCurve birkhoff_tighten(const SurfaceCurve& c, const TriMesh& mesh, int sweeps) {
  return birkhoff_tighten(c, MeshLocator(mesh), sweeps);
}

TightenResult tighten_sweepout(const Sweepout& sw, const MeshLocator& locator, int sweeps,
                               int jobs) {
  TightenResult r;
  r.sweepout = sw;
  auto& slices = r.sweepout.slices;
  const std::size_t count = slices.size();
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)),
                                                      1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (auto& c : slices) c = birkhoff_tighten(c, locator, sweeps);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) {
            slices[i] = birkhoff_tighten(slices[i], locator, sweeps);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    const double e = curve_energy(slices[i]);
    if (e > r.max_energy) {
      r.max_energy = e;
      r.argmax_index = static_cast<int>(i);
    }
  }
  return r;
}

double geodesic_residual(const SurfaceCurve& c, const MeshLocator& locator) {
  if (c.is_degenerate || c.points.size() < 3) return 0.0;
  const auto& p = c.points;
  const std::size_t m = p.size();
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3& a = p[(i + m - 1) % m].position;
    const Vec3& x = p[i].position;
    const Vec3& b = p[(i + 1) % m].position;
    const double l1 = (x - a).norm();
    const double l2 = (b - x).norm();
    if (!(l1 > 0.0) || !(l2 > 0.0)) continue;
    Vec3 k = (2.0 / (l1 + l2)) * ((b - x) / l2 - (x - a) / l1);
    const Vec3 n = locator.smooth_normal(p[i]);
    k -= k.dot(n) * n;
    Vec3 t = b - a;
    t -= t.dot(n) * n;
    if (t.norm() > 0.0) {
      t.normalize();
      k -= k.dot(t) * t;
    }
    worst = std::max(worst, k.norm());
  }
  return worst;
}

double geodesic_residual(const SurfaceCurve& c, const TriMesh& mesh) {
  return geodesic_residual(c, MeshLocator(mesh));
}

std::vector<Vec3> default_axes(int random_count, std::uint64_t seed) {
  std::vector<Vec3> axes{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  for (int i = 0; i < random_count; ++i) {
    SampleRng rng(seed, static_cast<std::uint64_t>(i));
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, kTwoPi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    axes.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return axes;
}

namespace {

double lipschitz_proxy(const Sweepout& sw) {
  double worst = 0.0;
  for (const auto& c : sw.slices) {
    if (c.is_degenerate || c.points.size() < 3) continue;
    const std::size_t m = c.points.size();
    double longest = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      longest = std::max(longest, (c.points[(i + 1) % m].position - c.points[i].position).norm());
    }
    // Segment i covers 2 pi / m of the parameter circle.
    worst = std::max(worst, longest * static_cast<double>(m) / kTwoPi);
  }
  return worst;
}

}  // namespace

WidthEstimate width_estimate(const TriMesh& mesh, std::span<const Vec3> axes, int slice_count,
                             int sweeps, int jobs) {
  if (axes.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one sweep axis");
  const MeshLocator locator(mesh);
  WidthEstimate est;
  est.slice_count = slice_count;
  est.tighten_iterations = sweeps;
  std::optional<TightenResult> best;
  for (const auto& axis : axes) {
    auto r = tighten_sweepout(build_sweepout_with(locator, axis, slice_count, 0.0), locator,
                              sweeps, jobs);
    est.per_axis.push_back(r.max_energy);
    if (!best || r.max_energy < best->max_energy) best = std::move(r);
  }
  est.value = best->max_energy;
  est.axis = best->sweepout.axis;
  est.argmax_index = best->argmax_index;
  est.argmax_curve = best->sweepout.slices[static_cast<std::size_t>(best->argmax_index)];
  est.degenerate = est.value == 0.0;
  est.geodesic_residual = geodesic_residual(est.argmax_curve, locator);
  est.lipschitz_proxy = lipschitz_proxy(best->sweepout);
  return est;
}

TriMesh displaced_mesh(const TriMesh& mesh, const SpeedSpec& spec, const CurvatureField& field,
                       double h) {
  if (field.size() != static_cast<std::size_t>(mesh.vertex_count())) {
    throw Error(ErrorKind::DimensionMismatch, "curvature field does not match the mesh");
  }
  std::vector<Vec3> v(mesh.vertices().begin(), mesh.vertices().end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::array<double, 2> l{field[i].k_min, field[i].k_max};
    v[i] += h * evaluate(spec, l) * field[i].normal;
  }
  try {
    return mesh.with_vertices(std::move(v));
  } catch (const Error& e) {
    throw Error(ErrorKind::ProjectionFailed, std::string("displaced mesh is invalid: ") + e.what());
  }
}

SurfaceCurve transport_curve(const SurfaceCurve& c, const MeshLocator& flowed) {
  SurfaceCurve out = c;
  for (auto& p : out.points) {
    if (p.face < 0 || p.face >= flowed.mesh().triangle_count()) {
      throw Error(ErrorKind::ProjectionFailed, "curve point refers to a missing face");
    }
    p = flowed.make_point(p.face, p.bary);
  }
  return out;
}

SurfaceCurve transport_curve(const SurfaceCurve& c, const TriMesh& flowed) {
  return transport_curve(c, MeshLocator(flowed));
}

SurfaceCurve transport_curve(const SurfaceCurve& c, const TriMesh& mesh, const SpeedSpec& spec,
                             const CurvatureField& field, double h) {
  if (h == 0.0) return c;
  return transport_curve(c, displaced_mesh(mesh, spec, field, h));
}

}  // namespace widthflow
