#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <numbers>
#include <thread>

#include <CLI11.hpp>

#include "svg.hpp"
#include "widthflow/error.hpp"
#include "widthflow/mesh_io.hpp"

namespace widthflow::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path prepare_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Recorded config minus the output location, so reruns elsewhere are byte-identical.
json provenance(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  return j;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json condition_json(const ConditionReport& r, const SpeedSpec& spec, double tol) {
  return {{"speed", spec.name()},
          {"n", spec.n()},
          {"degree", spec.degree()},
          {"declared_shape", std::string(to_string(spec.shape()))},
          {"shape_verdict", std::string(to_string(r.shape_verdict))},
          {"symmetry_max_violation", r.symmetry_max_violation},
          {"monotonicity_min_derivative", r.monotonicity_min_derivative},
          {"measured_degree", r.measured_degree},
          {"homogeneity_max_violation", r.homogeneity_max_violation},
          {"normalization_error", r.normalization_error},
          {"lower_bound_max_violation", r.lower_bound_max_violation},
          {"samples_used", r.samples_used},
          {"tol", tol},
          {"conforms", r.conforms(spec, tol)}};
}

json trace_meta(const FlowTrace& tr) {
  return {{"termination", std::string(to_string(tr.termination))},
          {"extinction_time", optional_json(tr.extinction_time)},
          {"steps", tr.steps},
          {"c0", tr.c0},
          {"speed", tr.speed_name},
          {"n", tr.n},
          {"degree", tr.degree},
          {"samples", tr.samples.size()},
          {"detail", tr.detail}};
}

void write_trace(const fs::path& path, const FlowTrace& tr) {
  std::ofstream f(path, std::ios::binary);
  write_trace_csv(f, tr);
}

double initial_inradius(const Surface& s) {
  return std::visit([](const auto& x) { return inradius(x); }, s);
}

// Bound line W(0)^p + slope * t, mapped back to W.
double bound_width(double w0, double t, int k, double slope) {
  const double p = 0.5 * (k + 1);
  const double v = std::pow(w0, p) + slope * t;
  return v > 0.0 ? std::pow(v, 1.0 / p) : 0.0;
}

void write_plots(const fs::path& dir, const FlowTrace& tr, double c0) {
  std::vector<double> t, inr, pin, wt, ww, bound;
  for (const auto& s : tr.samples) {
    t.push_back(s.t);
    inr.push_back(s.inradius);
    pin.push_back(s.sup_pinching);
  }
  const auto series = tr.width_series();
  const double slope =
      tr.degree == 1 ? -4.0 * std::numbers::pi / (tr.n * c0)
                     : -(tr.degree + 1) / std::pow(tr.n, tr.degree) *
                           std::pow(2.0 * std::numbers::pi, 0.5 * (tr.degree + 1));
  for (const auto& [ti, wi] : series) {
    wt.push_back(ti);
    ww.push_back(wi);
    bound.push_back(bound_width(series.front().second, ti - series.front().first, tr.degree, slope));
  }
  write_text(dir / "width.svg",
             line_plot("width along the flow", "t", "W(t)",
                       {{"measured W", wt, ww, "#1f77b4", false},
                        {"bound", wt, bound, "#d62728", true}}));
  write_text(dir / "pinching.svg",
             line_plot("pinching ratio", "t", "sup |H|/(nF)", {{"pinching", t, pin, "#2ca02c", false}}));
  write_text(dir / "inradius.svg",
             line_plot("inradius", "t", "r(t)", {{"inradius", t, inr, "#9467bd", false}}));
}

void print_reports(std::ostream& out, const std::vector<InequalityReport>& reports) {
  char line[256];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%s %-28s lhs=% .6g rhs=% .6g margin=% .6g tol=%.3g\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.lhs, r.rhs, r.margin, r.tol);
    out << line;
  }
}

InequalityReport speed_report(const ExperimentConfig& cfg, const SpeedSpec& spec) {
  const auto rep = check_conditions(spec, cfg.verify.condition_samples, cfg.seed, cfg.verify.condition_tol);
  const bool ok = rep.conforms(spec, cfg.verify.condition_tol);
  auto r = make_report("speed.conditions", ok ? 0.0 : 1.0, 0.0, 0.0);
  const json fields = condition_json(rep, spec, cfg.verify.condition_tol);
  for (const auto& [key, value] : fields.items()) {
    r.context[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return r;
}

TriMesh lemma_mesh(const ExperimentConfig& cfg) {
  ExperimentConfig m = cfg;
  m.surface.subdivisions = cfg.verify.lemma_subdivisions;
  return make_mesh(m);
}

std::vector<InequalityReport> lemma_reports(const TriMesh& mesh, const SpeedSpec& spec, int jobs) {
  GeodesicSearch search;
  search.jobs = jobs;
  const double h = default_derivative_step(mesh, spec);
  if (spec.degree() == 1) return {lemma2_check(mesh, spec, h, search)};
  return {lemma7_check(mesh, spec, h, search)};
}

}  // namespace

int cmd_check_speed(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto spec = make_speed(cfg);
  const double tol = cfg.verify.condition_tol;
  const auto rep = check_conditions(spec, cfg.verify.condition_samples, cfg.seed, tol);
  json j = condition_json(rep, spec, tol);
  j["seed"] = cfg.seed;
  ctx.out << j.dump(2) << "\n";
  write_json(prepare_dir(cfg) / "speed.json", j);
  return rep.conforms(spec, tol) ? kOk : kViolation;
}

int cmd_flow(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto spec = make_speed(cfg);
  const auto surface = make_surface(cfg);
  std::vector<ProbeHook> hooks;
  for (const auto& p : cfg.probes) {
    if (p == "width") hooks.push_back(width_probe(make_probe_options(cfg, ctx.jobs)));
  }
  const auto tr = run_flow(surface, spec, make_control(cfg), hooks);
  const auto dir = prepare_dir(cfg);
  write_trace(dir / "trace.csv", tr);
  json meta = trace_meta(tr);
  meta["config"] = provenance(cfg);
  write_json(dir / "trace.json", meta);
  ctx.out << "termination " << to_string(tr.termination);
  if (tr.extinction_time) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " extinction_time %.9g", *tr.extinction_time);
    ctx.out << buf;
  }
  ctx.out << " steps " << tr.steps << "\n";
  return tr.termination == Termination::ConvexityLost ? kViolation : kOk;
}

int cmd_width(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto mesh = make_mesh(cfg);
  const auto dir = prepare_dir(cfg);
  const double eps = cfg.control.eps_extinct.value_or(1e-6);
  json j{{"slice_count", cfg.width.slice_count}, {"sweeps", cfg.width.sweeps}};
  if (inradius(mesh) < eps) {
    j.update({{"value", 0.0}, {"axis", nullptr}, {"residual", nullptr}, {"degenerate", true},
              {"reason", "inradius below eps_extinct"}});
  } else {
    const auto w = width_estimate(mesh, make_axes(cfg), cfg.width.slice_count, cfg.width.sweeps,
                                  ctx.jobs);
    j.update({{"value", w.value},
              {"axis", {w.axis.x(), w.axis.y(), w.axis.z()}},
              {"residual", w.geodesic_residual},
              {"degenerate", w.degenerate},
              {"argmax_index", w.argmax_index},
              {"lipschitz_proxy", w.lipschitz_proxy},
              {"per_axis", w.per_axis}});
    std::ofstream obj(dir / "argmax_curve.obj", std::ios::binary);
    const auto pts = curve_positions(w.argmax_curve);
    write_polyline_obj(obj, pts);
  }
  j["config"] = provenance(cfg);
  write_json(dir / "width.json", j);
  char buf[96];
  std::snprintf(buf, sizeof buf, "width %.9g%s\n", j["value"].get<double>(),
                j["degenerate"].get<bool>() ? " (degenerate)" : "");
  ctx.out << buf;
  return kOk;
}

int cmd_verify(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto spec = make_speed(cfg);
  const auto dir = prepare_dir(cfg);
  json meta{{"config", provenance(cfg)}};
  std::vector<std::vector<InequalityReport>> groups;

  auto finish = [&](std::vector<std::vector<InequalityReport>> g) {
    const auto reports = merge_reports(std::move(g));
    write_json(dir / "verdict.json", json(reports));
    meta["pass"] = all_pass(reports);
    write_json(dir / "verify.json", meta);
    print_reports(ctx.out, reports);
    return all_pass(reports) ? kOk : kViolation;
  };

  // A speed that breaks its declared conditions stops the pipeline here.
  const auto sr = speed_report(cfg, spec);
  if (!sr.pass) {
    ctx.err << "speed '" << spec.name() << "' fails its declared conditions\n";
    return finish({{sr}});
  }
  groups.push_back({sr});
  const bool concave = spec.shape() == SpeedShape::Concave;

  if (!cfg.verify.trace.empty()) {
    std::ifstream in(cfg.verify.trace);
    auto tr = read_trace_csv(in);
    tr.n = spec.n();
    tr.degree = spec.degree();
    tr.speed_name = spec.name();
    const double c0 = concave && !tr.samples.empty() ? tr.samples.front().sup_pinching : 1.0;
    meta["trace"] = cfg.verify.trace;
    meta["c0"] = c0;
    groups.push_back(theorem1_check(tr, c0, cfg.verify.theorem1_tol));
    if (concave) {
      const auto pv = check_pinching_monotone(tr, cfg.verify.pinching_tol);
      groups.push_back({make_report("pinching.monotone", pv.max_increase, 0.0, cfg.verify.pinching_tol)});
    }
    write_plots(dir, tr, c0);
    return finish(std::move(groups));
  }

  // The geodesic checks and the flow share nothing, so they run side by side.
  const int lemma_jobs = std::max(1, ctx.jobs / 2);
  const int flow_jobs = std::max(1, ctx.jobs - lemma_jobs);
  auto lemma = std::async(ctx.jobs > 1 ? std::launch::async : std::launch::deferred,
                          [&] { return lemma_reports(lemma_mesh(cfg), spec, lemma_jobs); });

  const auto surface = make_surface(cfg);
  StepControl ctl = make_control(cfg);
  if (!ctl.probe_interval) {
    const int k = spec.degree();
    ctl.probe_interval = std::pow(initial_inradius(surface), k + 1) / (10.0 * (k + 1));
  }
  const ProbeHook hooks[] = {width_probe(make_probe_options(cfg, flow_jobs))};
  const auto tr = run_flow(surface, spec, ctl, hooks);
  const double c0 = concave ? tr.c0 : 1.0;
  write_trace(dir / "trace.csv", tr);
  meta["trace"] = trace_meta(tr);
  meta["c0"] = c0;
  meta["probe_interval"] = *ctl.probe_interval;

  groups.push_back(theorem1_check(tr, c0, cfg.verify.theorem1_tol));
  if (tr.termination == Termination::Extinct) {
    groups.push_back({corollary_check(tr, c0)});
  } else {
    ctx.err << "run ended with " << to_string(tr.termination) << "; corollary not checked\n";
    if (tr.termination == Termination::ConvexityLost) {
      groups.push_back({make_report("flow.convexity", 1.0, 0.0, 0.0, {{"detail", tr.detail}})});
    }
  }
  if (concave) {
    const auto pv = check_pinching_monotone(tr, cfg.verify.pinching_tol);
    groups.push_back({make_report("pinching.monotone", pv.max_increase, 0.0, cfg.verify.pinching_tol)});
  }
  groups.push_back(lemma.get());
  write_plots(dir, tr, c0);
  return finish(std::move(groups));
}

int cmd_report(const fs::path& dir, const RunContext& ctx) {
  const auto path = dir / "verdict.json";
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "no verdict at " + path.string());
  std::vector<InequalityReport> reports;
  try {
    reports = json::parse(in).get<std::vector<InequalityReport>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  print_reports(ctx.out, reports);
  std::size_t failed = 0;
  for (const auto& r : reports) failed += r.pass ? 0 : 1;
  ctx.out << reports.size() - failed << "/" << reports.size() << " checks pass\n";

  std::string md = "| check | lhs | rhs | margin | tol | pass |\n|---|---|---|---|---|---|\n";
  char row[256];
  for (const auto& r : reports) {
    std::snprintf(row, sizeof row, "| %s | %.6g | %.6g | %.6g | %.3g | %s |\n", r.name.c_str(),
                  r.lhs, r.rhs, r.margin, r.tol, r.pass ? "yes" : "no");
    md += row;
  }
  write_text(dir / "report.md", md);
  return failed == 0 ? kOk : kViolation;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Curvature flows of convex surfaces and sweepout width"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides WIDTHFLOW_OUT and the config)");
  app.add_option("--jobs", jobs, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "sampling seed");

  // Overrides shared by the subcommands; unset ones leave the config alone.
  std::optional<std::string> name, surface, mesh, axi, mode, integrator, trace;
  std::optional<int> n, k, intervals, subdivisions, slices, sweeps, samples, random_axes;
  std::optional<double> p, radius, a, c, max_time, safety, probe_interval, eps_extinct;
  bool width_probe_flag = false;
  auto add_speed = [&](CLI::App* s) {
    s->add_option("--name,--speed", name, "speed name");
    s->add_option("--n", n, "dimension n");
    s->add_option("--k", k, "degree for mean-power");
    s->add_option("--p", p, "exponent for power-mean");
  };
  auto add_surface = [&](CLI::App* s) {
    s->add_option("--surface", surface, "sphere | spheroid | custom-axi | mesh-file");
    s->add_option("--radius", radius, "sphere radius");
    s->add_option("--a", a, "spheroid equatorial semi-axis");
    s->add_option("--c", c, "spheroid polar semi-axis");
    s->add_option("--mesh", mesh, "OFF/OBJ mesh file (implies mesh-file)");
    s->add_option("--axi", axi, "support-function CSV (implies custom-axi)");
    s->add_option("--mode", mode, "axi | mesh");
    s->add_option("--intervals", intervals, "profile intervals");
    s->add_option("--subdivisions", subdivisions, "icosphere subdivisions");
  };
  auto add_width = [&](CLI::App* s) {
    s->add_option("--slices", slices, "slices per sweepout");
    s->add_option("--sweeps", sweeps, "Birkhoff sweeps");
    s->add_option("--random-axes", random_axes, "random axes added to x, y, z");
  };
  auto add_control = [&](CLI::App* s) {
    s->add_option("--max-time", max_time, "stop time");
    s->add_option("--safety", safety, "CFL safety factor");
    s->add_option("--integrator", integrator, "euler | heun");
    s->add_option("--probe-interval", probe_interval, "time between probes");
    s->add_option("--eps-extinct", eps_extinct, "extinction inradius");
  };

  auto* check = app.add_subcommand("check-speed", "sample the structural conditions of a speed");
  add_speed(check);
  check->add_option("--samples", samples, "samples per condition");
  auto* flow = app.add_subcommand("flow", "run a flow and write trace.csv");
  add_speed(flow);
  add_surface(flow);
  add_control(flow);
  add_width(flow);
  flow->add_flag("--width-probes", width_probe_flag, "measure the width at every probe");
  auto* width = app.add_subcommand("width", "estimate the width of a surface");
  add_surface(width);
  add_width(width);
  width->add_option("--eps-extinct", eps_extinct, "treat smaller inradius as a point");
  auto* verify = app.add_subcommand("verify", "check the inequalities along a flow");
  add_speed(verify);
  add_surface(verify);
  add_control(verify);
  add_width(verify);
  verify->add_option("--trace", trace, "verify a recorded trace CSV instead of running");
  std::string report_dir;
  auto* report = app.add_subcommand("report", "summarize a verify output directory");
  report->add_option("dir", report_dir, "directory holding verdict.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream so, se;
    const int code = app.exit(e, so, se);
    out << so.str();
    err << se.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (check->parsed() && !name && (config_path.empty())) {
      err << "check-speed needs --name or a config with a speed\n" << check->help();
      return kUsage;
    }
    if (name) cfg.speed.name = *name;
    if (n) cfg.speed.n = *n;
    if (k) cfg.speed.k = *k;
    if (p) cfg.speed.p = *p;
    if (surface) cfg.surface.kind = *surface;
    if (radius) cfg.surface.radius = *radius;
    if (a) cfg.surface.a = *a;
    if (c) cfg.surface.c = *c;
    if (mesh) cfg.surface.kind = "mesh-file", cfg.surface.path = *mesh;
    if (axi) cfg.surface.kind = "custom-axi", cfg.surface.path = *axi;
    if (mode) cfg.surface.mode = *mode;
    if (intervals) cfg.surface.intervals = *intervals;
    if (subdivisions) cfg.surface.subdivisions = *subdivisions;
    if (slices) cfg.width.slice_count = *slices;
    if (sweeps) cfg.width.sweeps = *sweeps;
    if (random_axes) cfg.width.random_axes = *random_axes;
    if (samples) cfg.verify.condition_samples = *samples;
    if (max_time) cfg.control.max_time = *max_time;
    if (safety) cfg.control.safety = *safety;
    if (integrator) cfg.control.integrator = *integrator;
    if (probe_interval) cfg.control.probe_interval = *probe_interval;
    if (eps_extinct) cfg.control.eps_extinct = *eps_extinct;
    if (trace) cfg.verify.trace = *trace;
    if (width_probe_flag && cfg.probes.empty()) cfg.probes.push_back("width");
    if (seed) cfg.seed = *seed;
    if (const char* env = std::getenv("WIDTHFLOW_OUT"); env && *env) cfg.output_dir = env;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    const RunContext ctx{jobs, out, err};
    if (report->parsed()) return cmd_report(report_dir.empty() ? cfg.output_dir : report_dir, ctx);
    validate(cfg);
    if (check->parsed()) return cmd_check_speed(cfg, ctx);
    if (flow->parsed()) return cmd_flow(cfg, ctx);
    if (width->parsed()) return cmd_width(cfg, ctx);
    return cmd_verify(cfg, ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::ParseError:
      case ErrorKind::InvalidArgument:
        return kUsage;
      default:
        return kViolation;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kViolation;
  }
}

}  // namespace widthflow::cli
