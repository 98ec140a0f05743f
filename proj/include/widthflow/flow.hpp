#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "widthflow/geom.hpp"
#include "widthflow/speed.hpp"
#include "widthflow/tri_mesh.hpp"

namespace widthflow {

using Surface = std::variant<AxiSurface, TriMesh>;

// Snapshot of the evolving surface. The curvature field is always the one of
// `surface`; every constructed state is strictly convex.
struct FlowState {
  double t = 0.0;
  Surface surface;
  CurvatureField curvature;
  // F at each curvature sample.
  std::vector<double> speed;
  double inradius = 0.0;
  // Pinching ratio sup |H| / (n F) of the initial surface.
  double c0 = 1.0;
  int ring_depth = 2;
};

// Builds the state at time t, measuring curvature, inradius and (when
// record_c0) the pinching ratio. Throws ConvexityLost for non-convex input.
FlowState make_state(Surface surface, const SpeedSpec& spec, double t = 0.0,
                     int ring_depth = 2);

enum class Integrator { Euler, Heun };

struct StepControl {
  double safety = 0.2;
  // Heun is the two-stage RK2 variant; each step costs two curvature solves.
  Integrator integrator = Integrator::Euler;
  // Extinction threshold on the inradius; defaults to 1e-3 * initial inradius.
  std::optional<double> eps_extinct;
  double eps_extinct_relative = 1e-3;
  double max_time = std::numeric_limits<double>::infinity();
  int snapshot_stride = 100;
  // When set, probes run at multiples of this time (steps are shortened to
  // land on them) instead of at every recorded sample.
  std::optional<double> probe_interval;
  bool keep_snapshots = false;
  int azimuth_count = 64;  // snapshot meshes of axisymmetric runs
  long max_steps = 100'000'000;
};

// Forward Euler step h_j <- h_j - dt F(lambda_j) of the support function.
FlowState step_axi(const FlowState& state, const SpeedSpec& spec, double dt);
// Forward Euler step x_v <- x_v + dt F(lambda_v) nu_v of the vertices.
// Throws TangledMesh when a face flips or collapses.
FlowState step_mesh(const FlowState& state, const SpeedSpec& spec, double dt);
FlowState step(const FlowState& state, const SpeedSpec& spec, double dt,
               Integrator integrator = Integrator::Euler);

// safety * min(h^2 / max sum_j dF/dl_j l_j^2, 0.05 inradius / max F), where h^2 is
// dtheta^2 for axisymmetric surfaces; for meshes the first bound is
// l_min^2 / max sum_j dF/dl_j with l_min the shortest edge.
double adaptive_dt(const FlowState& state, const SpeedSpec& spec, const StepControl& ctl);

enum class Termination { Extinct, ConvexityLost, MaxTimeReached };
std::string_view to_string(Termination termination);

struct FlowSample {
  double t = 0.0;
  double inradius = 0.0;
  double sup_pinching = 0.0;
  double max_speed = 0.0;
  std::optional<double> width;
  std::map<std::string, double> probes;
  std::optional<TriMesh> snapshot;
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  Termination termination = Termination::MaxTimeReached;
  std::optional<double> extinction_time;
  std::string speed_name;
  int n = 2;
  int degree = 1;
  double c0 = 1.0;
  long steps = 0;
  std::string detail;

  // Samples carrying a width measurement, in time order.
  std::vector<std::pair<double, double>> width_series() const;
};

// A probe measures a scalar on a snapshot. A probe named "width" fills
// FlowSample::width; others land in FlowSample::probes.
struct ProbeHook {
  std::string name;
  std::function<double(const FlowState&)> measure;
};

// Integrates until the inradius drops below eps_extinct (extinction time
// extrapolated linearly from the last two steps), convexity is lost, or
// max_time is reached. Throws InitialNotConvex for a non-convex start.
FlowTrace run_flow(const Surface& initial, const SpeedSpec& spec, const StepControl& ctl,
                   std::span<const ProbeHook> probes = {});

struct PinchingVerdict {
  bool pass = true;
  double max_increase = 0.0;
};

// Checks sup_pinching(t_{i+1}) <= sup_pinching(t_i) + tol over the trace.
PinchingVerdict check_pinching_monotone(const FlowTrace& trace, double tol);

// CSV with header t,inradius,sup_pinching,max_speed,width,dwdt_quotient.
// dwdt_quotient is the forward quotient from the previous width sample.
void write_trace_csv(std::ostream& out, const FlowTrace& trace);
FlowTrace read_trace_csv(std::istream& in);

}  // namespace widthflow
