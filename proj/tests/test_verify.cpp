#include <doctest.h>

#include <cmath>
#include <numbers>

#include "widthflow/error.hpp"
#include "widthflow/random.hpp"
#include "widthflow/verify.hpp"

using namespace widthflow;
using std::numbers::pi;

namespace {

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

const TriMesh& unit_sphere() {
  static const TriMesh m = icosphere(5);
  return m;
}

const TriMesh& spheroid() {
  static const TriMesh m = ellipsoid_mesh(4, 1.0, 1.0, 2.0);
  return m;
}

FlowTrace synthetic_trace(int degree, const std::function<double(double)>& w, int samples,
                          double t_end) {
  FlowTrace tr;
  tr.n = 2;
  tr.degree = degree;
  tr.speed_name = "synthetic";
  for (int i = 0; i < samples; ++i) {
    FlowSample s;
    s.t = t_end * i / (samples - 1);
    s.width = w(s.t);
    tr.samples.push_back(s);
  }
  return tr;
}

// Curvature field of the exact unit sphere on the mesh's vertices.
CurvatureField exact_sphere_field(const TriMesh& m) {
  auto f = curvatures_mesh(m);
  for (auto& p : f.points) p.k_min = p.k_max = p.mean = 1.0;
  return f;
}

SurfaceCurve wavy_equator(const SurfaceCurve& eq, const MeshLocator& loc, double amp) {
  SurfaceCurve c = eq;
  for (auto& p : c.points) {
    const double phi = std::atan2(p.position.y(), p.position.x());
    p = loc.project(p.position + Vec3(0, 0, amp * std::sin(3 * phi)), p);
  }
  return c;
}

}  // namespace

TEST_CASE("property: report consistency") {
  SampleRng rng(1, 0);
  for (int i = 0; i < 10000; ++i) {
    const double lhs = rng.uniform(-10, 10), rhs = rng.uniform(-10, 10), tol = rng.uniform(0, 3);
    const auto r = make_report("x", lhs, rhs, tol);
    CHECK(r.pass == (lhs <= rhs + tol));
    CHECK(r.margin == rhs - lhs);
    if (r.pass) CHECK(r.margin >= -tol);
  }
  CHECK_FALSE(make_report("nan", NAN, 0.0, 1.0).pass);
}

TEST_CASE("lemma2_check on the unit sphere") {
  const auto& m = unit_sphere();
  const auto am = arithmetic_mean(2);
  const auto r = lemma2_check(m, am, default_derivative_step(m, am));
  // E(t) = 2 pi (1 - 2t): dE/dt = -4 pi against -2 pi.
  CHECK(r.lhs == doctest::Approx(-4 * pi).epsilon(0.01));
  CHECK(r.rhs == doctest::Approx(-2 * pi).epsilon(1e-12));
  CHECK(r.margin == doctest::Approx(2 * pi).epsilon(0.02));
  CHECK(r.pass);
  REQUIRE(r.details.size() == 3);
  for (const auto& d : r.details) CHECK(d.pass);
  // F = 1/R for every normalized speed on a sphere.
  const auto g = lemma2_check(m, geometric_mean(2), default_derivative_step(m, am));
  CHECK(g.lhs == doctest::Approx(r.lhs).epsilon(1e-6));
  CHECK(std::stod(g.context.at("c0")) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("lemma2_check on the spheroid (1,1,2)") {
  const auto& m = spheroid();
  // The closed geodesic found is the equator, where the curvatures are 1 and
  // 1/4. dE/dt = -L^2/pi * F = -2 pi * 2F.
  SUBCASE("geometric mean, C0 measured") {
    const auto gm = geometric_mean(2);
    const auto r = lemma2_check(m, gm, default_derivative_step(m, gm));
    CHECK(std::stod(r.context.at("c0")) == doctest::Approx(1.25).epsilon(0.01));
    CHECK(r.lhs == doctest::Approx(-2 * pi).epsilon(0.02));
    CHECK(r.rhs == doctest::Approx(-4 * pi / (2 * 1.25)).epsilon(0.01));
    CHECK(r.pass);
    CHECK(r.margin > 0.0);
  }
  SUBCASE("arithmetic mean") {
    const auto am = arithmetic_mean(2);
    const auto r = lemma2_check(m, am, default_derivative_step(m, am));
    CHECK(r.lhs == doctest::Approx(-2.5 * pi).epsilon(0.02));
    CHECK(r.pass);
    CHECK(r.margin > 0.0);
  }
}

TEST_CASE("lemma7_check") {
  const auto& m = unit_sphere();
  SUBCASE("k = 2 sphere matches the closed form") {
    // E^{3/2} = (2 pi)^{3/2} R^3 and R^3 = 1 - 3t.
    const auto k2 = arithmetic_mean_power(2, 2);
    const auto r = lemma7_check(m, k2, default_derivative_step(m, k2));
    CHECK(r.lhs == doctest::Approx(-3 * std::pow(2 * pi, 1.5)).epsilon(0.01));
    CHECK(r.rhs == doctest::Approx(-0.75 * std::pow(2 * pi, 1.5)).epsilon(1e-12));
    CHECK(r.pass);
    for (const auto& d : r.details) CHECK(d.pass);
  }
  SUBCASE("k = 1 agrees with lemma2") {
    const auto am = arithmetic_mean(2);
    const auto g = find_closed_geodesic(m);
    const auto a = lemma2_check(m, am, g, 1e-3);
    const auto b = lemma7_check(m, am, g, 1e-3);
    CHECK(b.rhs == doctest::Approx(a.rhs).epsilon(1e-12));
    CHECK(b.lhs == doctest::Approx(a.lhs).epsilon(1e-12));
  }
  SUBCASE("errors") {
    const auto g = find_closed_geodesic(m);
    const auto am = arithmetic_mean(2);
    CHECK(error_kind_of([&] { lemma7_check(m, am, g, 0.0); }) == ErrorKind::InsufficientStep);
    CHECK(error_kind_of([&] { lemma7_check(m, am, g, 1e-300); }) == ErrorKind::InsufficientStep);
    CHECK(error_kind_of([&] { lemma7_check(m, geometric_mean(2), g, 1e-3); }) ==
          ErrorKind::ShapeHypothesisUnmet);
  }
}

TEST_CASE("find_closed_geodesic") {
  const auto g = find_closed_geodesic(unit_sphere());
  CHECK(curve_length(g) == doctest::Approx(2 * pi).epsilon(0.01));
  GeodesicSearch strict;
  strict.residual_threshold = 1e-12;
  strict.max_sweeps = 400;
  CHECK(error_kind_of([&] { find_closed_geodesic(unit_sphere(), strict); }) ==
        ErrorKind::NoGeodesicFound);
}

TEST_CASE("theorem1_check on synthetic traces") {
  SUBCASE("sphere closed form passes") {
    const auto tr = synthetic_trace(1, [](double t) { return 2 * pi * (1 - 2 * t); }, 6, 0.4);
    const auto reps = theorem1_check(tr, 1.0, 0.0);
    REQUIRE(reps.size() == 6);
    for (const auto& r : reps) CHECK(r.pass);
    CHECK(reps[0].lhs == doctest::Approx(-4 * pi).epsilon(1e-12));
    CHECK(reps[0].name == "theorem1.quotient.0000");
    CHECK(reps.back().name == "theorem1.integrated");
    // Worst case is the first later sample, t = 0.08.
    CHECK(reps.back().margin == doctest::Approx(0.08 * 2 * pi).epsilon(1e-12));
  }
  SUBCASE("stalled width fails with margin -4 pi/(n C0)") {
    const auto tr = synthetic_trace(1, [](double) { return 2 * pi; }, 5, 0.4);
    for (double c0 : {1.0, 1.25}) {
      const auto reps = theorem1_check(tr, c0, 0.0);
      CHECK_FALSE(all_pass(reps));
      CHECK(reps[0].margin == doctest::Approx(-4 * pi / (2 * c0)));
    }
  }
  SUBCASE("degree 2 uses the W^(3/2) form and keeps the raw quotient") {
    const auto tr = synthetic_trace(
        2, [](double t) { return 2 * pi * std::pow(1 - 3 * t, 2.0 / 3.0); }, 5, 0.3);
    const auto reps = theorem1_check(tr, 1.0, 0.0);
    CHECK(reps[0].name == "theorem4.quotient.0000");
    CHECK(reps[0].lhs == doctest::Approx(-3 * std::pow(2 * pi, 1.5)).epsilon(1e-9));
    CHECK(reps[0].context.count("raw_power_quotient") == 1);
    CHECK(all_pass(reps));
  }
  SUBCASE("too few samples") {
    const auto tr = synthetic_trace(1, [](double t) { return 1 - t; }, 2, 0.1);
    CHECK(error_kind_of([&] { theorem1_check(tr, 1.0, 0.0); }) == ErrorKind::InsufficientSamples);
  }
  SUBCASE("default tolerance") {
    const auto tr = synthetic_trace(1, [](double) { return 2.0; }, 5, 0.4);
    CHECK(theorem1_default_tol(tr, 0.01) == doctest::Approx(2 * 0.01 * 2.0 / 0.1));
  }
}

TEST_CASE("corollary_check") {
  auto tr = synthetic_trace(1, [](double t) { return 2 * pi * (1 - 2 * t); }, 5, 0.4);
  CHECK(error_kind_of([&] { corollary_check(tr, 1.0); }) == ErrorKind::NotExtinct);
  tr.termination = Termination::Extinct;
  tr.extinction_time = 0.5;
  const auto r = corollary_check(tr, 1.0);
  CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.margin == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.pass);
  // Radius 2: T = 2 and W(0) = 8 pi.
  auto big = synthetic_trace(1, [](double t) { return 8 * pi * (1 - t / 2); }, 5, 1.6);
  big.termination = Termination::Extinct;
  big.extinction_time = 2.0;
  CHECK(corollary_check(big, 1.0).rhs == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("flow runs with width probes") {
  WidthProbeOptions opts;
  opts.axes = {Vec3::UnitZ(), Vec3::UnitX()};
  const ProbeHook hooks[] = {width_probe(opts)};
  std::vector<double> first_quotients;
  for (double radius : {1.0, 2.0}) {
    StepControl ctl;
    ctl.probe_interval = 0.1 * radius * radius;
    const auto tr = run_flow(sphere_axi(60, radius), arithmetic_mean(2), ctl, hooks);
    REQUIRE(tr.termination == Termination::Extinct);
    const auto reps = theorem1_check(tr, 1.0, 0.1 * 2 * pi);
    for (const auto& r : reps) {
      CHECK(r.pass);
      if (r.name != "theorem1.integrated") CHECK(r.lhs == doctest::Approx(-4 * pi).epsilon(0.1));
    }
    first_quotients.push_back(reps[0].lhs);
    const auto c = corollary_check(tr, 1.0);
    CHECK(c.pass);
    CHECK(c.margin == doctest::Approx(0.5 * radius * radius).epsilon(0.02));
  }
  // Quotients are scale-free.
  CHECK(first_quotients[1] == doctest::Approx(first_quotients[0]).epsilon(0.05));
}

TEST_CASE("width_probe on a mesh state") {
  const auto state = make_state(Surface(unit_sphere()), arithmetic_mean(2));
  CHECK(width_probe().measure(state) == doctest::Approx(2 * pi).epsilon(0.03));
}

TEST_CASE("twocurves_stability") {
  const auto& m = unit_sphere();
  const MeshLocator loc(m);
  const auto field = exact_sphere_field(m);
  const auto am = arithmetic_mean(2);
  const auto eq = plane_section(loc, Vec3::UnitZ(), 0.0);
  CHECK(twocurves_stability(eq, eq, m, am, field, 1e-3) == 0.0);

  // The equator is critical for length, so |dE/dt difference| is second
  // order in the amplitude and the ratio falls off linearly.
  std::vector<double> ratio;
  for (double amp : {0.04, 0.02, 0.01}) {
    ratio.push_back(twocurves_stability(eq, wavy_equator(eq, loc, amp), m, am, field, 1e-3));
    CHECK(std::isfinite(ratio.back()));
    CHECK(ratio.back() > 0.0);
  }
  for (std::size_t i = 0; i + 1 < ratio.size(); ++i) {
    CHECK(ratio[i + 1] / ratio[i] >= 0.4);
    CHECK(ratio[i + 1] / ratio[i] <= 2.0);
  }
  const double slope = std::log(ratio[0] / ratio[2]) / std::log(4.0);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.3));

  SurfaceCurve shorter = eq;
  shorter.points.pop_back();
  CHECK(error_kind_of([&] { twocurves_stability(eq, shorter, m, am, field, 1e-3); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("merge_reports and JSON") {
  auto a = make_report("b", 1, 2, 0, {{"k", "v"}});
  a.details.push_back(make_report("b.sub", 0, 1, 0));
  const auto merged = merge_reports({{a, make_report("c", 3, 2, 0)}, {make_report("a", 0, 0, 0)}});
  REQUIRE(merged.size() == 3);
  CHECK(merged[0].name == "a");
  CHECK(merged[2].name == "c");
  CHECK_FALSE(all_pass(merged));
  const nlohmann::json j = merged;
  const auto back = j.get<std::vector<InequalityReport>>();
  CHECK(back[1].details.at(0).name == "b.sub");
  CHECK(back[1].context.at("k") == "v");
  CHECK(nlohmann::json(back).dump() == j.dump());
}
