#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "widthflow/flow.hpp"
#include "widthflow/geom.hpp"
#include "widthflow/speed.hpp"
#include "widthflow/width.hpp"

namespace widthflow {

// lhs <= rhs is the claim; margin = rhs - lhs, so pass <=> margin >= -tol.
struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = false;
  double tol = 0.0;
  std::map<std::string, std::string> context;
  std::vector<InequalityReport> details;  // intermediate steps of the same argument
};

InequalityReport make_report(std::string name, double lhs, double rhs, double tol,
                             std::map<std::string, std::string> context = {});

// 1 for convex and linear speeds, measured pinching for concave ones.
double initial_c0(const TriMesh& m, const SpeedSpec& spec, int ring_depth = 2);

// 1e-3 * inradius^(k+1).
double default_derivative_step(const TriMesh& m, const SpeedSpec& spec);

struct GeodesicSearch {
  int slice_count = 33;
  int sweeps = 200;
  int max_sweeps = 2000;
  // Residual (a curvature) times inradius must drop below this.
  double residual_threshold = 1e-2;
  std::vector<Vec3> axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  int jobs = 1;
};

// Closed geodesic from the tightened maximal slice. NoGeodesicFound when the
// residual stays above the threshold or the curve collapses.
SurfaceCurve find_closed_geodesic(const TriMesh& m, const GeodesicSearch& search = {});

// Central difference of curve_energy under transport by +-h.
double energy_derivative(const SurfaceCurve& c, const TriMesh& m, const SpeedSpec& spec,
                         const CurvatureField& field, double h);

InequalityReport lemma2_check(const TriMesh& m, const SpeedSpec& spec, double h,
                              const GeodesicSearch& search = {}, double tol = 0.0);
InequalityReport lemma2_check(const TriMesh& m, const SpeedSpec& spec, const SurfaceCurve& geodesic,
                              double h, double tol = 0.0);

InequalityReport lemma7_check(const TriMesh& m, const SpeedSpec& spec, double h,
                              const GeodesicSearch& search = {}, double tol = 0.0);
InequalityReport lemma7_check(const TriMesh& m, const SpeedSpec& spec, const SurfaceCurve& geodesic,
                              double h, double tol = 0.0);

// Degree 1: every forward quotient of W against -4 pi/(n C0), plus the
// integrated bound. Degree k >= 2 uses W^((k+1)/2) and -(k+1)/n^k (2 pi)^((k+1)/2);
// the raw W^(k+1) quotient is carried in the context only.
std::vector<InequalityReport> theorem1_check(const FlowTrace& trace, double c0, double tol);

// 2 * eps_mesh * W(0) / dt_min.
double theorem1_default_tol(const FlowTrace& trace, double eps_mesh);

// T <= n C0 W(0) / (4 pi); degree k integrates the W^((k+1)/2) rate instead.
InequalityReport corollary_check(const FlowTrace& trace, double c0);

// Empirical |dE/dt(c1) - dE/dt(c2)| / (|c1 - c2|_{W^{1,2}} (1 + sup|c1'|^2)).
// Both curves need the same point count; they are compared index by index
// over a uniform parameter on [0, 1).
double twocurves_stability(const SurfaceCurve& c1, const SurfaceCurve& c2, const TriMesh& m,
                           const SpeedSpec& spec, const CurvatureField& field, double h);

struct WidthProbeOptions {
  std::vector<Vec3> axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  int slice_count = 33;
  int sweeps = 200;
  int azimuth_count = 64;
  int jobs = 1;
};

// Probe named "width" for run_flow. Axisymmetric states are meshed first.
ProbeHook width_probe(const WidthProbeOptions& options = {});

// Sorted by name; stable for equal names.
std::vector<InequalityReport> merge_reports(std::vector<std::vector<InequalityReport>> groups);

bool all_pass(const std::vector<InequalityReport>& reports);

void to_json(nlohmann::json& j, const InequalityReport& r);
void from_json(const nlohmann::json& j, InequalityReport& r);

}  // namespace widthflow
