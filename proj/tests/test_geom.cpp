#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "widthflow/error.hpp"
#include "widthflow/geom.hpp"
#include "widthflow/mesh_io.hpp"
#include "widthflow/random.hpp"

using namespace widthflow;
using std::numbers::pi;

namespace {

// Spheroid with equatorial semi-axis a and polar semi-axis c, parameterised
// by the polar angle theta of the normal. With D = a^2 sin^2 + c^2 cos^2 the
// principal radii are a^2 / sqrt(D) (parallel) and a^2 c^2 / D^{3/2}
// (meridian).
struct SpheroidOracle {
  double a, c;
  double parallel_curvature(double th) const {
    const double d = a * a * std::sin(th) * std::sin(th) + c * c * std::cos(th) * std::cos(th);
    return std::sqrt(d) / (a * a);
  }
  double meridian_curvature(double th) const {
    const double d = a * a * std::sin(th) * std::sin(th) + c * c * std::cos(th) * std::cos(th);
    return std::pow(d, 1.5) / (a * a * c * c);
  }
  // Polar angle of the outward normal at a boundary point.
  double normal_angle(const Vec3& p) const {
    const Vec3 n(p.x() / (a * a), p.y() / (a * a), p.z() / (c * c));
    return std::acos(std::clamp(n.normalized().z(), -1.0, 1.0));
  }
};

template <typename Fn>
ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidArgument;
}

double max_axi_error(int intervals) {
  const SpheroidOracle oracle{1.0, 2.0};
  const auto s = spheroid_axi(intervals, 1.0, 2.0);
  const auto field = curvatures_axi(s);
  double err = 0.0;
  for (int j = 0; j <= s.intervals(); ++j) {
    const double th = s.theta(j);
    const double k1 = oracle.parallel_curvature(th);
    const double k2 = oracle.meridian_curvature(th);
    err = std::max(err, std::abs(field[static_cast<std::size_t>(j)].k_min - std::min(k1, k2)));
    err = std::max(err, std::abs(field[static_cast<std::size_t>(j)].k_max - std::max(k1, k2)));
  }
  return err;
}

}  // namespace

TEST_CASE("AxiSurface: grid layout") {
  const auto s = sphere_axi(8, 2.0);
  CHECK(s.intervals() == 8);
  CHECK(s.grid().size() == 7);
  CHECK(s.grid().front() == doctest::Approx(pi / 8));
  CHECK(s.pole_values().first == 2.0);
  CHECK(error_kind_of([] { AxiSurface({1.0, 1.0, -1.0, 1.0, 1.0}); }) ==
        ErrorKind::InvalidSurface);
}

TEST_CASE("curvatures_axi: round sphere") {
  const auto field = curvatures_axi(sphere_axi(50, 2.0));
  for (const auto& p : field.points) {
    CHECK(p.k_min == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.k_max == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(p.normal.norm() - 1.0) <= 1e-10);
  }
}

TEST_CASE("curvatures_axi: spheroid (1,1,2) against analytic curvatures") {
  const double e100 = max_axi_error(100);
  const double e200 = max_axi_error(200);
  const double e400 = max_axi_error(400);
  CHECK(e100 < 5e-3);
  // Observed order over three resolutions.
  CHECK(std::log2(e100 / e200) >= 1.8);
  CHECK(std::log2(e200 / e400) >= 1.8);
}

TEST_CASE("curvatures_axi: non-convex support function") {
  const auto s = AxiSurface::from_function(64, [](double th) { return 1.0 + 0.2 * std::cos(4 * th); });
  CHECK(error_kind_of([&] { curvatures_axi(s); }) == ErrorKind::ConvexityLost);
}

TEST_CASE("axi_to_mesh: construction") {
  const auto s = sphere_axi(40, 1.0);
  const auto m = axi_to_mesh(s, 24);
  CHECK(m.vertex_count() == 39 * 24 + 2);
  for (const auto& v : m.vertices()) CHECK(std::abs(v.norm() - 1.0) <= 1e-10);
  CHECK(m.signed_volume() > 0.0);
  CHECK(error_kind_of([&] { axi_to_mesh(s, 4); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("axi_to_mesh: spheroid vertices lie on the ellipsoid") {
  const auto m = axi_to_mesh(spheroid_axi(200, 1.0, 2.0), 32);
  double worst = 0.0;
  for (const auto& v : m.vertices()) {
    const double q = v.x() * v.x() + v.y() * v.y() + v.z() * v.z() / 4.0;
    worst = std::max(worst, std::abs(q - 1.0));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("inradius") {
  CHECK(inradius(sphere_axi(64, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inradius(spheroid_axi(128, 1.0, 2.0)) == doctest::Approx(1.0).epsilon(1e-12));
  // Off-centre sphere: the centroid re-centres the support function.
  CHECK(inradius(sphere_axi(256, 1.0).translated(0.3)) == doctest::Approx(1.0).epsilon(1e-6));

  const auto ico = icosphere(5);
  const double r = inradius(ico);
  CHECK(r < 1.0);
  CHECK(r > 0.998);
  CHECK(inradius(translated(ico, Vec3(0.3, 0, 0))) == doctest::Approx(r).epsilon(1e-9));

  // Spheroid mesh inradius approaches the minimum semi-axis.
  const double coarse = 1.0 - inradius(axi_to_mesh(spheroid_axi(32, 1.0, 2.0), 32));
  const double fine = 1.0 - inradius(axi_to_mesh(spheroid_axi(128, 1.0, 2.0), 128));
  CHECK(fine < coarse);
  CHECK(fine < 1e-3);
}

TEST_CASE("curvatures_mesh: icosphere") {
  const auto field = curvatures_mesh(icosphere(4), 2);
  for (const auto& p : field.points) {
    CHECK(p.k_min == doctest::Approx(1.0).epsilon(0.02));
    CHECK(p.k_max == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("curvatures_mesh: second-order convergence on spheres") {
  double errs[3];
  for (int i = 0; i < 3; ++i) {
    const auto field = curvatures_mesh(icosphere(2 + i), 2);
    double e = 0.0;
    for (const auto& p : field.points) {
      e = std::max({e, std::abs(p.k_min - 1.0), std::abs(p.k_max - 1.0)});
    }
    errs[i] = e;
  }
  CHECK(std::log2(errs[0] / errs[1]) >= 1.8);
  CHECK(std::log2(errs[1] / errs[2]) >= 1.8);
}

TEST_CASE("curvatures_mesh: spheroid (1,1,2)") {
  const SpheroidOracle oracle{1.0, 2.0};
  const auto mesh = ellipsoid_mesh(5, 1.0, 1.0, 2.0);
  const auto field = curvatures_mesh(mesh, 2);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double th = oracle.normal_angle(mesh.vertex(v));
    const double k1 = oracle.parallel_curvature(th);
    const double k2 = oracle.meridian_curvature(th);
    const auto& p = field[static_cast<std::size_t>(v)];
    CHECK(p.k_min == doctest::Approx(std::min(k1, k2)).epsilon(0.05));
    CHECK(p.k_max == doctest::Approx(std::max(k1, k2)).epsilon(0.05));
  }
}

TEST_CASE("curvatures_mesh: flat cap is rejected") {
  const auto ico = icosphere(3);
  std::vector<Vec3> v(ico.vertices().begin(), ico.vertices().end());
  for (auto& p : v) p.z() = std::min(p.z(), 0.5);
  const auto capped = ico.with_vertices(std::move(v));
  CHECK(error_kind_of([&] { curvatures_mesh(capped, 2); }) == ErrorKind::FitRankDeficient);
}

TEST_CASE("property: inward normals point toward the centroid") {
  for (const auto& mesh : {icosphere(3), ellipsoid_mesh(3, 1.0, 1.5, 2.0),
                           axi_to_mesh(spheroid_axi(48, 1.0, 2.0), 40)}) {
    const Vec3 c = mesh.centroid();
    const auto field = curvatures_mesh(mesh, 2);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      CHECK(field[static_cast<std::size_t>(i)].normal.dot(mesh.vertex(i) - c) < 0.0);
      CHECK(std::abs(field[static_cast<std::size_t>(i)].normal.norm() - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("axi_to_mesh then curvatures_mesh agrees with curvatures_axi") {
  const auto s = spheroid_axi(64, 1.0, 2.0);
  const int azimuths = 64;
  const auto axi = curvatures_axi(s);
  const auto mesh_field = curvatures_mesh(axi_to_mesh(s, azimuths), 2);
  double worst = 0.0;
  for (int j = 1; j < s.intervals(); ++j) {
    const auto& ref = axi[static_cast<std::size_t>(j)];
    for (int a = 0; a < azimuths; ++a) {
      const auto& p = mesh_field[static_cast<std::size_t>(1 + (j - 1) * azimuths + a)];
      worst = std::max({worst, std::abs(p.k_min / ref.k_min - 1.0),
                        std::abs(p.k_max / ref.k_max - 1.0)});
    }
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("pinching_ratio") {
  const auto sphere = curvatures_axi(sphere_axi(32, 3.0));
  CHECK(pinching_ratio(sphere, geometric_mean(2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pinching_ratio(sphere, harmonic_mean(2)) == doctest::Approx(1.0).epsilon(1e-12));

  const auto s = spheroid_axi(400, 1.0, 2.0);
  const auto field = curvatures_axi(s);
  CHECK(pinching_ratio(field, arithmetic_mean(2)) == doctest::Approx(1.0).epsilon(1e-14));

  // Dense sampling of the analytic curvatures.
  const SpheroidOracle oracle{1.0, 2.0};
  double oracle_c0 = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double th = pi * i / 100000.0;
    const double k1 = oracle.parallel_curvature(th);
    const double k2 = oracle.meridian_curvature(th);
    oracle_c0 = std::max(oracle_c0, (k1 + k2) / (2.0 * std::sqrt(k1 * k2)));
  }
  CHECK(oracle_c0 == doctest::Approx(1.25).epsilon(1e-9));
  CHECK(pinching_ratio(field, geometric_mean(2)) == doctest::Approx(oracle_c0).epsilon(1e-4));

  CHECK(error_kind_of([&] { pinching_ratio(field, geometric_mean(3)); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("property: pinching ratio >= 1 for concave normalised speeds") {
  // On a single point, |H| / (n F) = mean / F >= 1 when F is concave.
  SampleRng rng(5, 0);
  for (const auto& spec : {geometric_mean(2), harmonic_mean(2)}) {
    for (int i = 0; i < 10000; ++i) {
      CurvatureField f;
      const double a = std::exp(rng.uniform(-3, 3));
      const double b = std::exp(rng.uniform(-3, 3));
      f.points.push_back({std::min(a, b), std::max(a, b), Vec3(0, 0, -1), a + b});
      CHECK(pinching_ratio(f, spec) >= 1.0 - 1e-15);
    }
  }
}

TEST_CASE("mesh IO round trips and errors") {
  const auto m = icosphere(2);
  for (int fmt = 0; fmt < 2; ++fmt) {
    std::stringstream buf;
    if (fmt == 0) write_off(buf, m); else write_obj(buf, m);
    const auto back = fmt == 0 ? read_off(buf) : read_obj(buf);
    REQUIRE(back.vertex_count() == m.vertex_count());
    REQUIRE(back.triangle_count() == m.triangle_count());
    for (int v = 0; v < m.vertex_count(); ++v) CHECK(back.vertex(v) == m.vertex(v));
  }
  std::stringstream garbage("OFF\n3 x\n");
  CHECK(error_kind_of([&] { read_off(garbage); }) == ErrorKind::ParseError);
  std::stringstream open("OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n");
  CHECK(error_kind_of([&] { read_off(open); }) == ErrorKind::InvalidSurface);

  const auto s = spheroid_axi(16, 1.0, 2.0);
  std::stringstream csv;
  write_axi_csv(csv, s);
  const auto sb = read_axi_csv(csv);
  REQUIRE(sb.intervals() == 16);
  for (int j = 0; j <= 16; ++j) CHECK(sb.h(j) == s.h(j));
}
