#include "config.hpp"

#include <fstream>
#include <set>

#include "widthflow/error.hpp"
#include "widthflow/mesh_io.hpp"

namespace widthflow::cli {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::ParseError, msg); }

void only_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) bad(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
void read(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  T v{};
  read(j, key, v);
  out = v;
}

Vec3 read_axis(const json& a) {
  if (!a.is_array() || a.size() != 3) bad("axes entries must be [x, y, z]");
  Vec3 v(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
  if (!(v.norm() > 0.0) || !v.allFinite()) bad("axis must be a nonzero finite vector");
  return v.normalized();
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  only_keys(j, "config",
            {"surface", "speed", "control", "width", "verify", "probes", "output_dir", "seed"});
  if (j.contains("surface")) {
    const auto& s = j["surface"];
    only_keys(s, "surface",
              {"kind", "radius", "a", "c", "path", "intervals", "subdivisions", "mode"});
    read(s, "kind", cfg.surface.kind);
    read(s, "radius", cfg.surface.radius);
    read(s, "a", cfg.surface.a);
    read(s, "c", cfg.surface.c);
    read(s, "path", cfg.surface.path);
    read(s, "intervals", cfg.surface.intervals);
    read(s, "subdivisions", cfg.surface.subdivisions);
    read(s, "mode", cfg.surface.mode);
  }
  if (j.contains("speed")) {
    const auto& s = j["speed"];
    only_keys(s, "speed", {"name", "n", "k", "p"});
    read(s, "name", cfg.speed.name);
    read(s, "n", cfg.speed.n);
    read(s, "k", cfg.speed.k);
    read(s, "p", cfg.speed.p);
  }
  if (j.contains("control")) {
    const auto& s = j["control"];
    only_keys(s, "control",
              {"safety", "integrator", "eps_extinct", "max_time", "snapshot_stride",
               "probe_interval", "azimuth_count"});
    read(s, "safety", cfg.control.safety);
    read(s, "integrator", cfg.control.integrator);
    read(s, "eps_extinct", cfg.control.eps_extinct);
    read(s, "max_time", cfg.control.max_time);
    read(s, "snapshot_stride", cfg.control.snapshot_stride);
    read(s, "probe_interval", cfg.control.probe_interval);
    read(s, "azimuth_count", cfg.control.azimuth_count);
  }
  if (j.contains("width")) {
    const auto& s = j["width"];
    only_keys(s, "width", {"slice_count", "sweeps", "random_axes", "axes"});
    read(s, "slice_count", cfg.width.slice_count);
    read(s, "sweeps", cfg.width.sweeps);
    read(s, "random_axes", cfg.width.random_axes);
    if (s.contains("axes")) {
      if (!s["axes"].is_array()) bad("width.axes must be a list");
      for (const auto& a : s["axes"]) cfg.width.axes.push_back(read_axis(a));
    }
  }
  if (j.contains("verify")) {
    const auto& s = j["verify"];
    only_keys(s, "verify",
              {"theorem1_tol", "pinching_tol", "condition_samples", "condition_tol",
               "lemma_subdivisions", "trace"});
    read(s, "theorem1_tol", cfg.verify.theorem1_tol);
    read(s, "pinching_tol", cfg.verify.pinching_tol);
    read(s, "condition_samples", cfg.verify.condition_samples);
    read(s, "condition_tol", cfg.verify.condition_tol);
    read(s, "lemma_subdivisions", cfg.verify.lemma_subdivisions);
    read(s, "trace", cfg.verify.trace);
  }
  read(j, "probes", cfg.probes);
  read(j, "output_dir", cfg.output_dir);
  read(j, "seed", cfg.seed);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
  auto cfg = parse_config(j);
  // Relative paths inside a config are relative to the config file.
  const auto base = path.parent_path();
  auto rebase = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  rebase(cfg.surface.path);
  rebase(cfg.verify.trace);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  const auto& s = cfg.surface;
  static const std::set<std::string> kinds{"sphere", "spheroid", "custom-axi", "mesh-file"};
  if (!kinds.count(s.kind)) bad("surface.kind must be sphere, spheroid, custom-axi or mesh-file");
  if (s.mode != "axi" && s.mode != "mesh") bad("surface.mode must be axi or mesh");
  if (!(s.radius > 0.0) || !(s.a > 0.0) || !(s.c > 0.0)) bad("surface dimensions must be positive");
  if (s.intervals < 8 || s.intervals > 100000) bad("surface.intervals must be in [8, 100000]");
  if (s.subdivisions < 0 || s.subdivisions > 7) bad("surface.subdivisions must be in [0, 7]");
  if (s.kind == "custom-axi" || s.kind == "mesh-file") {
    if (s.path.empty()) bad("surface.path is required for " + s.kind);
    if (!std::filesystem::exists(s.path)) bad("surface.path does not exist: " + s.path);
  }
  const auto names = builtin_speed_names();
  if (std::find(names.begin(), names.end(), cfg.speed.name) == names.end()) {
    bad("unknown speed '" + cfg.speed.name + "'");
  }
  if (cfg.speed.n < 1 || cfg.speed.n > 16) bad("speed.n must be in [1, 16]");
  if (cfg.speed.k < 1 || cfg.speed.k > 8) bad("speed.k must be in [1, 8]");
  const auto& c = cfg.control;
  if (!(c.safety > 0.0 && c.safety <= 1.0)) bad("control.safety must be in (0, 1]");
  if (c.integrator != "euler" && c.integrator != "heun") bad("control.integrator must be euler or heun");
  if (c.eps_extinct && !(*c.eps_extinct > 0.0)) bad("control.eps_extinct must be positive");
  if (c.max_time && !(*c.max_time > 0.0)) bad("control.max_time must be positive");
  if (c.probe_interval && !(*c.probe_interval > 0.0)) bad("control.probe_interval must be positive");
  if (c.snapshot_stride < 1) bad("control.snapshot_stride must be >= 1");
  if (c.azimuth_count < 8) bad("control.azimuth_count must be >= 8");
  if (cfg.width.slice_count < 8) bad("width.slice_count must be >= 8");
  if (cfg.width.sweeps < 0) bad("width.sweeps must be >= 0");
  if (cfg.width.random_axes < 0) bad("width.random_axes must be >= 0");
  if (!(cfg.verify.theorem1_tol >= 0.0) || !(cfg.verify.pinching_tol >= 0.0)) {
    bad("verify tolerances must be non-negative");
  }
  if (cfg.verify.condition_samples < 1) bad("verify.condition_samples must be >= 1");
  if (cfg.verify.lemma_subdivisions < 1 || cfg.verify.lemma_subdivisions > 7) {
    bad("verify.lemma_subdivisions must be in [1, 7]");
  }
  if (!cfg.verify.trace.empty() && !std::filesystem::exists(cfg.verify.trace)) {
    bad("verify.trace does not exist: " + cfg.verify.trace);
  }
  for (const auto& p : cfg.probes) {
    if (p != "width") bad("unknown probe '" + p + "'");
  }
  if (cfg.output_dir.empty()) bad("output_dir must not be empty");
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json axes = json::array();
  for (const auto& a : cfg.width.axes) axes.push_back({a.x(), a.y(), a.z()});
  return {{"surface",
           {{"kind", cfg.surface.kind},
            {"radius", cfg.surface.radius},
            {"a", cfg.surface.a},
            {"c", cfg.surface.c},
            {"path", cfg.surface.path},
            {"intervals", cfg.surface.intervals},
            {"subdivisions", cfg.surface.subdivisions},
            {"mode", cfg.surface.mode}}},
          {"speed",
           {{"name", cfg.speed.name}, {"n", cfg.speed.n}, {"k", cfg.speed.k}, {"p", cfg.speed.p}}},
          {"control",
           {{"safety", cfg.control.safety},
            {"integrator", cfg.control.integrator},
            {"eps_extinct", opt(cfg.control.eps_extinct)},
            {"max_time", opt(cfg.control.max_time)},
            {"snapshot_stride", cfg.control.snapshot_stride},
            {"probe_interval", opt(cfg.control.probe_interval)},
            {"azimuth_count", cfg.control.azimuth_count}}},
          {"width",
           {{"slice_count", cfg.width.slice_count},
            {"sweeps", cfg.width.sweeps},
            {"random_axes", cfg.width.random_axes},
            {"axes", axes}}},
          {"verify",
           {{"theorem1_tol", cfg.verify.theorem1_tol},
            {"pinching_tol", cfg.verify.pinching_tol},
            {"condition_samples", cfg.verify.condition_samples},
            {"condition_tol", cfg.verify.condition_tol},
            {"lemma_subdivisions", cfg.verify.lemma_subdivisions},
            {"trace", cfg.verify.trace}}},
          {"probes", cfg.probes},
          {"output_dir", cfg.output_dir},
          {"seed", cfg.seed}};
}

SpeedSpec make_speed(const ExperimentConfig& cfg) {
  return speed_by_name(cfg.speed.name, cfg.speed.n, cfg.speed.k, cfg.speed.p);
}

Surface make_surface(const ExperimentConfig& cfg) {
  const auto& s = cfg.surface;
  if (s.kind == "mesh-file") return read_mesh(s.path);
  if (s.mode == "mesh") return make_mesh(cfg);
  if (s.kind == "sphere") return sphere_axi(s.intervals, s.radius);
  if (s.kind == "spheroid") return spheroid_axi(s.intervals, s.a, s.c);
  return read_axi_csv(std::filesystem::path(s.path));
}

TriMesh make_mesh(const ExperimentConfig& cfg) {
  const auto& s = cfg.surface;
  if (s.kind == "sphere") return icosphere(s.subdivisions, s.radius);
  if (s.kind == "spheroid") return ellipsoid_mesh(s.subdivisions, s.a, s.a, s.c);
  if (s.kind == "mesh-file") return read_mesh(s.path);
  return axi_to_mesh(read_axi_csv(std::filesystem::path(s.path)), cfg.control.azimuth_count);
}

StepControl make_control(const ExperimentConfig& cfg) {
  StepControl ctl;
  ctl.safety = cfg.control.safety;
  ctl.integrator = cfg.control.integrator == "heun" ? Integrator::Heun : Integrator::Euler;
  ctl.eps_extinct = cfg.control.eps_extinct;
  if (cfg.control.max_time) ctl.max_time = *cfg.control.max_time;
  ctl.snapshot_stride = cfg.control.snapshot_stride;
  ctl.probe_interval = cfg.control.probe_interval;
  ctl.azimuth_count = cfg.control.azimuth_count;
  return ctl;
}

std::vector<Vec3> make_axes(const ExperimentConfig& cfg) {
  if (!cfg.width.axes.empty()) return cfg.width.axes;
  return default_axes(cfg.width.random_axes, cfg.seed);
}

WidthProbeOptions make_probe_options(const ExperimentConfig& cfg, int jobs) {
  WidthProbeOptions o;
  o.axes = make_axes(cfg);
  o.slice_count = cfg.width.slice_count;
  o.sweeps = cfg.width.sweeps;
  o.azimuth_count = cfg.control.azimuth_count;
  o.jobs = jobs;
  return o;
}

}  // namespace widthflow::cli
