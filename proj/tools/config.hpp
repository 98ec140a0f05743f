#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "widthflow/flow.hpp"
#include "widthflow/speed.hpp"
#include "widthflow/verify.hpp"

namespace widthflow::cli {

struct SurfaceConfig {
  std::string kind = "sphere";  // sphere | spheroid | custom-axi | mesh-file
  double radius = 1.0;
  double a = 1.0;  // spheroid equatorial semi-axis
  double c = 2.0;  // spheroid polar semi-axis
  std::string path;
  int intervals = 100;
  int subdivisions = 4;
  std::string mode = "axi";  // axi | mesh; mesh-file always runs as mesh
};

struct SpeedConfig {
  std::string name = "arithmetic-mean";
  int n = 2;
  int k = 1;
  double p = 2.0;
};

struct ControlConfig {
  double safety = 0.2;
  std::string integrator = "euler";
  std::optional<double> eps_extinct;
  std::optional<double> max_time;
  int snapshot_stride = 100;
  std::optional<double> probe_interval;
  int azimuth_count = 64;
};

struct WidthConfig {
  int slice_count = 33;
  int sweeps = 200;
  int random_axes = 0;  // added after x, y, z
  std::vector<Vec3> axes;  // explicit list replaces the default set
};

struct VerifyConfig {
  double theorem1_tol = 0.1 * 2.0 * 3.141592653589793;
  double pinching_tol = 1e-3;
  int condition_samples = 10000;
  double condition_tol = 1e-9;
  int lemma_subdivisions = 4;
  std::string trace;  // verify a recorded CSV instead of running a flow
};

struct ExperimentConfig {
  SurfaceConfig surface;
  SpeedConfig speed;
  ControlConfig control;
  WidthConfig width;
  VerifyConfig verify;
  std::vector<std::string> probes;
  std::string output_dir = "widthflow-out";
  std::uint64_t seed = 0;
};

// Unknown keys and out-of-range values raise ParseError; referenced files must exist.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);

// Every field including defaults, for provenance in outputs.
nlohmann::json to_json(const ExperimentConfig& cfg);

SpeedSpec make_speed(const ExperimentConfig& cfg);
Surface make_surface(const ExperimentConfig& cfg);
TriMesh make_mesh(const ExperimentConfig& cfg);  // mesh form of the surface
StepControl make_control(const ExperimentConfig& cfg);
std::vector<Vec3> make_axes(const ExperimentConfig& cfg);
WidthProbeOptions make_probe_options(const ExperimentConfig& cfg, int jobs);

}  // namespace widthflow::cli
