#include "widthflow/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "widthflow/error.hpp"

namespace widthflow {

namespace {

std::array<double, 2> lambda_of(const CurvaturePoint& p) { return {p.k_min, p.k_max}; }

void require_surface_dimension(const SpeedSpec& spec) {
  if (spec.n() != 2) {
    throw Error(ErrorKind::DimensionMismatch,
                "surfaces in R^3 need a speed of 2 curvatures, got n = " +
                    std::to_string(spec.n()));
  }
}

CurvatureField measure(const Surface& surface, int ring_depth) {
  if (const auto* axi = std::get_if<AxiSurface>(&surface)) return curvatures_axi(*axi);
  auto field = curvatures_mesh(std::get<TriMesh>(surface), ring_depth);
  for (std::size_t v = 0; v < field.size(); ++v) {
    if (!(field[v].k_min > 0.0)) {
      throw Error(ErrorKind::ConvexityLost,
                  "non-positive principal curvature at vertex " + std::to_string(v));
    }
  }
  return field;
}

double surface_inradius(const Surface& surface) {
  return std::visit([](const auto& s) { return inradius(s); }, surface);
}

std::vector<double> speeds(const CurvatureField& field, const SpeedSpec& spec) {
  std::vector<double> f(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto l = lambda_of(field[i]);
    f[i] = spec(l);
  }
  return f;
}

FlowState advance(const FlowState& state, const SpeedSpec& spec, Surface surface, double dt) {
  auto curvature = measure(surface, state.ring_depth);
  auto f = speeds(curvature, spec);
  const double r = surface_inradius(surface);
  return FlowState{state.t + dt, std::move(surface), std::move(curvature), std::move(f), r,
                   state.c0, state.ring_depth};
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::InvalidArgument, "time step must be positive and finite");
  }
}

}  // namespace

FlowState make_state(Surface surface, const SpeedSpec& spec, double t, int ring_depth) {
  require_surface_dimension(spec);
  auto curvature = measure(surface, ring_depth);
  auto f = speeds(curvature, spec);
  const double r = surface_inradius(surface);
  const double c0 = pinching_ratio(curvature, spec);
  return FlowState{t, std::move(surface), std::move(curvature), std::move(f), r, c0, ring_depth};
}

FlowState step_axi(const FlowState& state, const SpeedSpec& spec, double dt) {
  check_dt(dt);
  const auto& s = std::get<AxiSurface>(state.surface);
  const auto& f = state.speed;
  std::vector<double> h(s.values().begin(), s.values().end());
  for (std::size_t j = 0; j < h.size(); ++j) h[j] -= dt * f[j];
  if (!std::all_of(h.begin(), h.end(), [](double v) { return v > 0.0; })) {
    throw Error(ErrorKind::ConvexityLost, "support function left the positive range");
  }
  return advance(state, spec, AxiSurface(std::move(h)), dt);
}

FlowState step_mesh(const FlowState& state, const SpeedSpec& spec, double dt) {
  check_dt(dt);
  const auto& m = std::get<TriMesh>(state.surface);
  const auto& f = state.speed;
  std::vector<Vec3> v(m.vertices().begin(), m.vertices().end());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += dt * f[i] * state.curvature[i].normal;

  std::optional<TriMesh> moved;
  try {
    moved = m.with_vertices(std::move(v));
  } catch (const Error& e) {
    throw Error(ErrorKind::TangledMesh, e.what());
  }
  for (int t = 0; t < m.triangle_count(); ++t) {
    if (!(moved->face_normal(t).dot(m.face_normal(t)) > 0.0)) {
      throw Error(ErrorKind::TangledMesh, "triangle " + std::to_string(t) + " inverted");
    }
  }
  return advance(state, spec, std::move(*moved), dt);
}

FlowState step(const FlowState& state, const SpeedSpec& spec, double dt, Integrator integrator) {
  const bool axi = std::holds_alternative<AxiSurface>(state.surface);
  auto euler = [&](const FlowState& s) {
    return axi ? step_axi(s, spec, dt) : step_mesh(s, spec, dt);
  };
  if (integrator == Integrator::Euler) return euler(state);
  // Heun: average the start with the end of two chained Euler stages.
  const FlowState twice = euler(euler(state));
  if (axi) {
    const auto a = std::get<AxiSurface>(state.surface).values();
    const auto b = std::get<AxiSurface>(twice.surface).values();
    std::vector<double> h(a.size());
    for (std::size_t j = 0; j < h.size(); ++j) h[j] = 0.5 * (a[j] + b[j]);
    return advance(state, spec, AxiSurface(std::move(h)), dt);
  }
  const auto& ma = std::get<TriMesh>(state.surface);
  const auto& mb = std::get<TriMesh>(twice.surface);
  std::vector<Vec3> v(ma.vertices().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (ma.vertices()[i] + mb.vertices()[i]);
  std::optional<TriMesh> avg;
  try {
    avg = ma.with_vertices(std::move(v));
  } catch (const Error& e) {
    throw Error(ErrorKind::TangledMesh, e.what());
  }
  return advance(state, spec, std::move(*avg), dt);
}

double adaptive_dt(const FlowState& state, const SpeedSpec& spec, const StepControl& ctl) {
  if (!(ctl.safety > 0.0 && ctl.safety <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "safety must lie in (0, 1]");
  }
  const bool axi = std::holds_alternative<AxiSurface>(state.surface);
  double diffusion = 0.0;
  double max_f = 0.0;
  std::array<double, 2> g{};
  for (const auto& p : state.curvature.points) {
    const auto l = lambda_of(p);
    partials(spec, l, g);
    // Mesh mode works in physical length, so the lambda^2 factor of the
    // angular grid is absorbed into the edge length.
    const double d = axi ? g[0] * l[0] * l[0] + g[1] * l[1] * l[1] : g[0] + g[1];
    diffusion = std::max(diffusion, d);
  }
  for (double f : state.speed) max_f = std::max(max_f, f);
  double h2;
  if (axi) {
    const double dth = std::get<AxiSurface>(state.surface).spacing();
    h2 = dth * dth;
  } else {
    const double l = std::get<TriMesh>(state.surface).min_edge_length();
    h2 = l * l;
  }
  return ctl.safety * std::min(h2 / diffusion, 0.05 * state.inradius / max_f);
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Extinct: return "Extinct";
    case Termination::ConvexityLost: return "ConvexityLost";
    case Termination::MaxTimeReached: return "MaxTimeReached";
  }
  return "?";
}

std::vector<std::pair<double, double>> FlowTrace::width_series() const {
  std::vector<std::pair<double, double>> out;
  for (const auto& s : samples) {
    if (s.width) out.emplace_back(s.t, *s.width);
  }
  return out;
}

FlowTrace run_flow(const Surface& initial, const SpeedSpec& spec, const StepControl& ctl,
                   std::span<const ProbeHook> probes) {
  if (!(ctl.safety > 0.0 && ctl.safety <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "safety must lie in (0, 1]");
  }
  if (ctl.snapshot_stride < 1) throw Error(ErrorKind::InvalidArgument, "snapshot_stride must be >= 1");
  if (ctl.probe_interval && !(*ctl.probe_interval > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "probe_interval must be positive");
  }

  std::optional<FlowState> current;
  try {
    current = make_state(initial, spec);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConvexityLost || e.kind() == ErrorKind::FitRankDeficient) {
      throw Error(ErrorKind::InitialNotConvex, e.what());
    }
    throw;
  }
  FlowState& state = *current;
  const double eps = ctl.eps_extinct.value_or(ctl.eps_extinct_relative * state.inradius);
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "eps_extinct must be positive");

  FlowTrace trace;
  trace.speed_name = spec.name();
  trace.n = spec.n();
  trace.degree = spec.degree();
  trace.c0 = state.c0;

  auto record = [&](const FlowState& s, bool run_probes) {
    FlowSample sample;
    sample.t = s.t;
    sample.inradius = s.inradius;
    sample.sup_pinching = pinching_ratio(s.curvature, spec);
    for (double f : s.speed) sample.max_speed = std::max(sample.max_speed, f);
    if (run_probes) {
      for (const auto& probe : probes) {
        const double value = probe.measure(s);
        if (probe.name == "width") {
          sample.width = value;
        } else {
          sample.probes[probe.name] = value;
        }
      }
    }
    if (ctl.keep_snapshots) {
      if (const auto* axi = std::get_if<AxiSurface>(&s.surface)) {
        sample.snapshot = axi_to_mesh(*axi, ctl.azimuth_count);
      } else {
        sample.snapshot = std::get<TriMesh>(s.surface);
      }
    }
    trace.samples.push_back(std::move(sample));
  };

  record(state, true);
  long next_probe = 1;
  double prev_t = state.t;
  double prev_r = state.inradius;
  while (true) {
    double dt = adaptive_dt(state, spec, ctl);
    bool at_probe = false;
    if (ctl.probe_interval) {
      const double target = static_cast<double>(next_probe) * *ctl.probe_interval;
      if (state.t + dt >= target - 1e-12 * target) {
        dt = target - state.t;
        at_probe = true;
      }
    }
    bool at_end = false;
    if (state.t + dt >= ctl.max_time) {
      dt = ctl.max_time - state.t;
      at_end = true;
    }
    if (!(dt > 0.0)) {
      trace.termination = Termination::MaxTimeReached;
      break;
    }

    try {
      state = step(state, spec, dt, ctl.integrator);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ConvexityLost && e.kind() != ErrorKind::TangledMesh &&
          e.kind() != ErrorKind::FitRankDeficient) {
        throw;
      }
      trace.termination = Termination::ConvexityLost;
      trace.detail = e.what();
      break;
    }
    ++trace.steps;
    if (ctl.probe_interval && at_probe) {
      // The probe time can also coincide with max_time.
      ++next_probe;
    }

    const double r = state.inradius;
    if (r < eps) {
      trace.termination = Termination::Extinct;
      trace.extinction_time = state.t + r * (state.t - prev_t) / (prev_r - r);
      record(state, false);
      break;
    }
    if (at_end) {
      trace.termination = Termination::MaxTimeReached;
      record(state, true);
      break;
    }
    if (trace.steps >= ctl.max_steps) {
      trace.termination = Termination::MaxTimeReached;
      trace.detail = "step budget exhausted";
      record(state, true);
      break;
    }
    const bool stride_hit = trace.steps % ctl.snapshot_stride == 0;
    if (ctl.probe_interval ? at_probe : stride_hit) {
      record(state, true);
    } else if (stride_hit) {
      record(state, false);
    }
    prev_t = state.t;
    prev_r = r;
  }
  return trace;
}

PinchingVerdict check_pinching_monotone(const FlowTrace& trace, double tol) {
  PinchingVerdict v;
  v.max_increase = 0.0;
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    const double inc = trace.samples[i].sup_pinching - trace.samples[i - 1].sup_pinching;
    v.max_increase = std::max(v.max_increase, inc);
  }
  v.pass = v.max_increase <= tol;
  return v;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const FlowTrace& trace) {
  out << "t,inradius,sup_pinching,max_speed,width,dwdt_quotient\n";
  std::optional<std::pair<double, double>> last;
  for (const auto& s : trace.samples) {
    out << fmt(s.t) << ',' << fmt(s.inradius) << ',' << fmt(s.sup_pinching) << ','
        << fmt(s.max_speed) << ',';
    if (s.width) {
      out << fmt(*s.width) << ',';
      if (last) out << fmt((*s.width - last->second) / (s.t - last->first));
      last = std::make_pair(s.t, *s.width);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

FlowTrace read_trace_csv(std::istream& in) {
  FlowTrace trace;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,inradius,sup_pinching,max_speed,width", 0) != 0) {
    throw Error(ErrorKind::ParseError, "trace CSV: missing header");
  }
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fields.push_back(cell);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() < 5) {
      throw Error(ErrorKind::ParseError, "trace CSV row " + std::to_string(row) + ": too few fields");
    }
    auto num = [&](const std::string& text) {
      try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError,
                    "trace CSV row " + std::to_string(row) + ": bad number '" + text + "'");
      }
    };
    FlowSample s;
    s.t = num(fields[0]);
    s.inradius = num(fields[1]);
    s.sup_pinching = num(fields[2]);
    s.max_speed = num(fields[3]);
    if (!fields[4].empty()) s.width = num(fields[4]);
    if (!trace.samples.empty() && !(s.t > trace.samples.back().t)) {
      throw Error(ErrorKind::ParseError, "trace CSV row " + std::to_string(row) + ": time not increasing");
    }
    trace.samples.push_back(std::move(s));
  }
  return trace;
}

}  // namespace widthflow
