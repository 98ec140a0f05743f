#include "widthflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <variant>

#include "widthflow/error.hpp"

namespace widthflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Turning angle and dual length at each vertex of a closed polyline. The
// discrete |H_Sigma| at vertex i is angle_i / dual_i.
struct DiscreteCurvature {
  std::vector<double> angle;
  std::vector<double> dual;
};

DiscreteCurvature discrete_curvature(const SurfaceCurve& c) {
  const std::size_t m = c.size();
  DiscreteCurvature out;
  out.angle.resize(m);
  out.dual.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3& a = c.points[(i + m - 1) % m].position;
    const Vec3& b = c.points[i].position;
    const Vec3& d = c.points[(i + 1) % m].position;
    const Vec3 e0 = b - a;
    const Vec3 e1 = d - b;
    out.angle[i] = std::atan2(e0.cross(e1).norm(), e0.dot(e1));
    out.dual[i] = 0.5 * (e0.norm() + e1.norm());
  }
  return out;
}

// (int |H|, int |H|^p) over the curve.
std::pair<double, double> curvature_integrals(const SurfaceCurve& c, double p) {
  const auto dc = discrete_curvature(c);
  double l1 = 0.0, lp = 0.0;
  for (std::size_t i = 0; i < dc.angle.size(); ++i) {
    if (dc.dual[i] <= 0.0) continue;
    l1 += dc.angle[i];
    lp += std::pow(dc.angle[i] / dc.dual[i], p) * dc.dual[i];
  }
  return {l1, lp};
}

double power_energy_derivative(const SurfaceCurve& c, const TriMesh& m, const SpeedSpec& spec,
                               const CurvatureField& field, double h, double p) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorKind::InsufficientStep, "derivative step must be positive, got " + fmt(h));
  }
  const double ep = curve_energy(transport_curve(c, m, spec, field, h));
  const double em = curve_energy(transport_curve(c, m, spec, field, -h));
  if (ep == em && curve_energy(c) > 0.0) {
    throw Error(ErrorKind::InsufficientStep, "step " + fmt(h) + " does not move the curve");
  }
  return (std::pow(ep, p) - std::pow(em, p)) / (2.0 * h);
}

void require_geodesic(const SurfaceCurve& g) {
  if (g.is_degenerate || g.size() < 3) {
    throw Error(ErrorKind::NoGeodesicFound, "curve is degenerate");
  }
}

std::map<std::string, std::string> base_context(const TriMesh& m, const SpeedSpec& spec, double h) {
  return {{"speed", spec.name()},
          {"n", std::to_string(spec.n())},
          {"degree", std::to_string(spec.degree())},
          {"h", fmt(h)},
          {"vertices", std::to_string(m.vertex_count())}};
}

}  // namespace

InequalityReport make_report(std::string name, double lhs, double rhs, double tol,
                             std::map<std::string, std::string> context) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.tol = tol;
  r.margin = rhs - lhs;
  r.pass = lhs <= rhs + tol;  // false for NaN
  r.context = std::move(context);
  return r;
}

double initial_c0(const TriMesh& m, const SpeedSpec& spec, int ring_depth) {
  if (spec.shape() != SpeedShape::Concave) return 1.0;
  return pinching_ratio(curvatures_mesh(m, ring_depth), spec);
}

double default_derivative_step(const TriMesh& m, const SpeedSpec& spec) {
  return 1e-3 * std::pow(inradius(m), spec.degree() + 1);
}

SurfaceCurve find_closed_geodesic(const TriMesh& m, const GeodesicSearch& search) {
  const auto w = width_estimate(m, search.axes, search.slice_count, search.sweeps, search.jobs);
  const double r = inradius(m);
  const double threshold = search.residual_threshold / r;
  SurfaceCurve c = w.argmax_curve;
  require_geodesic(c);
  double residual = w.geodesic_residual;
  int used = search.sweeps;
  const MeshLocator loc(m);
  while (residual > threshold && used < search.max_sweeps) {
    const int block = std::min(search.sweeps, search.max_sweeps - used);
    c = birkhoff_tighten(c, loc, block);
    used += block;
    require_geodesic(c);
    residual = geodesic_residual(c, loc);
  }
  if (residual > threshold) {
    throw Error(ErrorKind::NoGeodesicFound, "residual " + fmt(residual) + " after " +
                                                std::to_string(used) + " sweeps, threshold " +
                                                fmt(threshold));
  }
  return c;
}

double energy_derivative(const SurfaceCurve& c, const TriMesh& m, const SpeedSpec& spec,
                         const CurvatureField& field, double h) {
  return power_energy_derivative(c, m, spec, field, h, 1.0);
}

InequalityReport lemma2_check(const TriMesh& m, const SpeedSpec& spec, double h,
                              const GeodesicSearch& search, double tol) {
  if (!(h > 0.0)) throw Error(ErrorKind::InsufficientStep, "h must be positive");
  return lemma2_check(m, spec, find_closed_geodesic(m, search), h, tol);
}

InequalityReport lemma2_check(const TriMesh& m, const SpeedSpec& spec, const SurfaceCurve& geodesic,
                              double h, double tol) {
  require_geodesic(geodesic);
  const auto field = curvatures_mesh(m);
  const double c0 = initial_c0(m, spec);
  const double n = spec.n();
  const double dedt = energy_derivative(geodesic, m, spec, field, h);

  auto ctx = base_context(m, spec, h);
  ctx["c0"] = fmt(c0);
  ctx["geodesic_residual"] = fmt(geodesic_residual(geodesic, m));
  auto r = make_report("lemma2", dedt, -4.0 * std::numbers::pi / (n * c0), tol, ctx);

  const double v0 = curve_length(geodesic);
  const auto [l1, l2] = curvature_integrals(geodesic, 2.0);
  r.details.push_back(make_report("lemma2.first_variation", std::numbers::pi * dedt,
                                  -v0 / (n * c0) * l2, tol));
  r.details.push_back(make_report("lemma2.cauchy_schwarz", l1 * l1, v0 * l2, 1e-12 * v0 * l2));
  r.details.push_back(make_report("lemma2.fenchel", kTwoPi, l1, 1e-6));
  return r;
}

InequalityReport lemma7_check(const TriMesh& m, const SpeedSpec& spec, double h,
                              const GeodesicSearch& search, double tol) {
  if (!(h > 0.0)) throw Error(ErrorKind::InsufficientStep, "h must be positive");
  return lemma7_check(m, spec, find_closed_geodesic(m, search), h, tol);
}

InequalityReport lemma7_check(const TriMesh& m, const SpeedSpec& spec, const SurfaceCurve& geodesic,
                              double h, double tol) {
  if (spec.shape() == SpeedShape::Concave) {
    throw Error(ErrorKind::ShapeHypothesisUnmet, spec.name() + " is concave");
  }
  require_geodesic(geodesic);
  const int k = spec.degree();
  const double n = spec.n();
  const double p = 0.5 * (k + 1);
  const auto field = curvatures_mesh(m);
  const double d = power_energy_derivative(geodesic, m, spec, field, h, p);
  const double bound = -(k + 1) / std::pow(n, k) * std::pow(kTwoPi, p);

  auto ctx = base_context(m, spec, h);
  ctx["geodesic_residual"] = fmt(geodesic_residual(geodesic, m));
  auto r = make_report("lemma7", d, bound, tol, ctx);

  const double v0 = curve_length(geodesic);
  const auto [l1, lk] = curvature_integrals(geodesic, k + 1.0);
  const double holder_rhs = std::pow(v0, k) * lk;
  r.details.push_back(make_report("lemma7.holder", std::pow(l1, k + 1), holder_rhs,
                                  1e-12 * holder_rhs));
  r.details.push_back(make_report("lemma7.fenchel", kTwoPi, l1, 1e-6));
  return r;
}

std::vector<InequalityReport> theorem1_check(const FlowTrace& trace, double c0, double tol) {
  const auto series = trace.width_series();
  if (series.size() < 3) {
    throw Error(ErrorKind::InsufficientSamples,
                std::to_string(series.size()) + " width samples, need 3");
  }
  const int k = trace.degree;
  const double n = trace.n;
  const double p = 0.5 * (k + 1);
  const double bound = k == 1 ? -4.0 * std::numbers::pi / (n * c0)
                              : -(k + 1) / std::pow(n, k) * std::pow(kTwoPi, p);
  const std::string prefix = k == 1 ? "theorem1" : "theorem4";

  std::vector<InequalityReport> out;
  char name[64];
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const auto [t0, w0] = series[i];
    const auto [t1, w1] = series[i + 1];
    const double q = (std::pow(w1, p) - std::pow(w0, p)) / (t1 - t0);
    std::snprintf(name, sizeof name, "%s.quotient.%04zu", prefix.c_str(), i);
    std::map<std::string, std::string> ctx{{"t0", fmt(t0)}, {"t1", fmt(t1)},
                                           {"w0", fmt(w0)}, {"w1", fmt(w1)},
                                           {"c0", fmt(c0)}, {"speed", trace.speed_name}};
    if (k > 1) {
      ctx["raw_power_quotient"] = fmt((std::pow(w1, k + 1) - std::pow(w0, k + 1)) / (t1 - t0));
    }
    out.push_back(make_report(name, q, bound, tol, std::move(ctx)));
  }

  // W(t)^p <= W(0)^p + bound (t - t0), worst later sample; tolerance integrated over the span.
  const auto [ta, wa] = series.front();
  double worst = -INFINITY;
  double worst_t = ta;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const auto [t, w] = series[i];
    const double excess = std::pow(w, p) - std::pow(wa, p) - bound * (t - ta);
    if (excess > worst) {
      worst = excess;
      worst_t = t;
    }
  }
  const double span = series.back().first - ta;
  out.push_back(make_report(prefix + ".integrated", worst, 0.0, tol * span,
                            {{"worst_t", fmt(worst_t)}, {"bound_slope", fmt(bound)},
                             {"c0", fmt(c0)}, {"speed", trace.speed_name}}));
  return out;
}

double theorem1_default_tol(const FlowTrace& trace, double eps_mesh) {
  const auto series = trace.width_series();
  if (series.size() < 2) {
    throw Error(ErrorKind::InsufficientSamples, "need 2 width samples for a time gap");
  }
  double gap = INFINITY;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    gap = std::min(gap, series[i + 1].first - series[i].first);
  }
  return 2.0 * eps_mesh * series.front().second / gap;
}

InequalityReport corollary_check(const FlowTrace& trace, double c0) {
  if (trace.termination != Termination::Extinct || !trace.extinction_time) {
    throw Error(ErrorKind::NotExtinct,
                "run ended with " + std::string(to_string(trace.termination)));
  }
  const auto series = trace.width_series();
  if (series.empty()) throw Error(ErrorKind::InsufficientSamples, "no width sample");
  const double w0 = series.front().second;
  const int k = trace.degree;
  const double n = trace.n;
  const double bound =
      k == 1 ? n * c0 * w0 / (4.0 * std::numbers::pi)
             : std::pow(n, k) * std::pow(w0, 0.5 * (k + 1)) /
                   ((k + 1) * std::pow(kTwoPi, 0.5 * (k + 1)));
  return make_report("corollary", *trace.extinction_time, bound, 0.0,
                     {{"w0", fmt(w0)}, {"c0", fmt(c0)}, {"speed", trace.speed_name},
                      {"t_w0", fmt(series.front().first)}});
}

double twocurves_stability(const SurfaceCurve& c1, const SurfaceCurve& c2, const TriMesh& m,
                           const SpeedSpec& spec, const CurvatureField& field, double h) {
  if (c1.size() != c2.size() || c1.size() < 3) {
    throw Error(ErrorKind::DimensionMismatch, "curves need equal point counts (>= 3), got " +
                                                  std::to_string(c1.size()) + " and " +
                                                  std::to_string(c2.size()));
  }
  const std::size_t count = c1.size();
  const double mm = static_cast<double>(count);
  double sq = 0.0, sup_d1 = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = (i + 1) % count;
    const Vec3 d = c1.points[i].position - c2.points[i].position;
    const Vec3 dn = c1.points[j].position - c2.points[j].position;
    sq += d.squaredNorm() + (dn - d).squaredNorm() * mm * mm;
    sup_d1 = std::max(sup_d1, (c1.points[j].position - c1.points[i].position).squaredNorm() * mm * mm);
  }
  const double dist = std::sqrt(sq / mm);
  if (dist == 0.0) return 0.0;
  const double diff = std::abs(energy_derivative(c1, m, spec, field, h) -
                               energy_derivative(c2, m, spec, field, h));
  return diff / (dist * (1.0 + sup_d1));
}

ProbeHook width_probe(const WidthProbeOptions& options) {
  return {"width", [options](const FlowState& state) {
            const TriMesh mesh = std::visit(
                [&](const auto& s) -> TriMesh {
                  if constexpr (std::is_same_v<std::decay_t<decltype(s)>, AxiSurface>) {
                    return axi_to_mesh(s, options.azimuth_count);
                  } else {
                    return s;
                  }
                },
                state.surface);
            return width_estimate(mesh, options.axes, options.slice_count, options.sweeps,
                                  options.jobs)
                .value;
          }};
}

std::vector<InequalityReport> merge_reports(std::vector<std::vector<InequalityReport>> groups) {
  std::vector<InequalityReport> out;
  for (auto& g : groups) {
    for (auto& r : g) out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

bool all_pass(const std::vector<InequalityReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

void to_json(nlohmann::json& j, const InequalityReport& r) {
  j = nlohmann::json{{"name", r.name}, {"lhs", r.lhs},   {"rhs", r.rhs},
                     {"margin", r.margin}, {"pass", r.pass}, {"tol", r.tol},
                     {"context", r.context}};
  j["details"] = nlohmann::json::array();
  for (const auto& d : r.details) j["details"].push_back(d);
}

void from_json(const nlohmann::json& j, InequalityReport& r) {
  r.name = j.at("name").get<std::string>();
  r.lhs = j.at("lhs").get<double>();
  r.rhs = j.at("rhs").get<double>();
  r.margin = j.at("margin").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.tol = j.at("tol").get<double>();
  r.context = j.value("context", std::map<std::string, std::string>{});
  r.details.clear();
  if (j.contains("details")) {
    for (const auto& d : j.at("details")) r.details.push_back(d.get<InequalityReport>());
  }
}

}  // namespace widthflow
