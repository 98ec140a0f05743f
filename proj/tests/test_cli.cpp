#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unistd.h>

#include "commands.hpp"
#include "widthflow/mesh_io.hpp"

using namespace widthflow;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "widthflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("widthflow_cli_" + std::to_string(getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("check-speed exit codes") {
  const auto dir = scratch("speed");
  const auto ok = run({"check-speed", "--name", "geometric-mean", "--n", "2", "--samples", "2000",
                       "--out", dir.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("\"shape_verdict\": \"concave\"") != std::string::npos);
  CHECK(read_json(dir / "speed.json")["conforms"] == true);
  for (const char* broken : {"broken-asym", "broken-norm"}) {
    CHECK(run({"check-speed", "--name", broken, "--samples", "2000", "--out", dir.string()}).code == 1);
  }
  CHECK(run({"check-speed", "--out", dir.string()}).code == 2);
  CHECK(run({"check-speed", "--name", "no-such-speed", "--out", dir.string()}).code == 2);
  CHECK(run({"check-speed", "--name", "arithmetic-mean", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("flow subcommand") {
  const auto dir = scratch("flow");
  SUBCASE("sphere extinction") {
    const auto r = run({"flow", "--surface", "sphere", "--intervals", "100", "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto meta = read_json(dir / "trace.json");
    CHECK(meta["termination"] == "Extinct");
    CHECK(meta["extinction_time"].get<double>() == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(meta["config"]["speed"]["name"] == "arithmetic-mean");
    std::ifstream csv(dir / "trace.csv");
    const auto tr = read_trace_csv(csv);
    CHECK(tr.samples.size() > 10);
  }
  SUBCASE("max time") {
    REQUIRE(run({"flow", "--intervals", "60", "--max-time", "0.1", "--out", dir.string()}).code == 0);
    CHECK(read_json(dir / "trace.json")["termination"] == "MaxTimeReached");
  }
  SUBCASE("non-convex mesh input") {
    const auto m = icosphere(3);
    std::vector<Vec3> v(m.vertices().begin(), m.vertices().end());
    v[0] *= 0.6;
    write_mesh(dir / "dent.off", m.with_vertices(std::move(v)));
    const auto r = run({"flow", "--mesh", (dir / "dent.off").string(), "--out", dir.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("InitialNotConvex") != std::string::npos);
  }
}

TEST_CASE("width subcommand") {
  const auto dir = scratch("width");
  SUBCASE("unit sphere") {
    REQUIRE(run({"width", "--subdivisions", "5", "--out", dir.string()}).code == 0);
    const auto j = read_json(dir / "width.json");
    CHECK(j["value"].get<double>() == doctest::Approx(2 * pi).epsilon(0.03));
    CHECK(j["degenerate"] == false);
    CHECK(fs::exists(dir / "argmax_curve.obj"));
  }
  SUBCASE("point-like mesh") {
    REQUIRE(run({"width", "--radius", "1e-8", "--out", dir.string()}).code == 0);
    const auto j = read_json(dir / "width.json");
    CHECK(j["value"].get<double>() == 0.0);
    CHECK(j["degenerate"] == true);
  }
  SUBCASE("bad mesh file") {
    std::ofstream(dir / "bad.off") << "OFF\ngarbage\n";
    CHECK(run({"width", "--mesh", (dir / "bad.off").string(), "--out", dir.string()}).code == 2);
    CHECK(run({"width", "--mesh", (dir / "missing.off").string(), "--out", dir.string()}).code == 2);
  }
}

TEST_CASE("verify and report") {
  const auto dir = scratch("verify");
  SUBCASE("sphere pipeline passes") {
    const auto r = run({"verify", "--out", dir.string(), "--jobs", "1"});
    CHECK(r.code == 0);
    const auto v = read_json(dir / "verdict.json");
    REQUIRE(v.is_array());
    bool saw_lemma = false, saw_corollary = false;
    for (const auto& rep : v) {
      CHECK(rep["pass"] == true);
      for (const char* key : {"name", "lhs", "rhs", "margin", "pass", "tol", "context"}) {
        CHECK(rep.contains(key));
      }
      saw_lemma |= rep["name"] == "lemma2";
      saw_corollary |= rep["name"] == "corollary";
    }
    CHECK(saw_lemma);
    CHECK(saw_corollary);
    for (const char* f : {"width.svg", "pinching.svg", "inradius.svg", "trace.csv"}) {
      CHECK(fs::exists(dir / f));
    }
    CHECK(slurp(dir / "width.svg").find("bound") != std::string::npos);
    CHECK(run({"report", dir.string()}).code == 0);
    CHECK(fs::exists(dir / "report.md"));
  }
  SUBCASE("stalled width trace fails") {
    std::ofstream csv(dir / "stalled.csv");
    csv << "t,inradius,sup_pinching,max_speed,width,dwdt_quotient\n";
    for (int i = 0; i < 5; ++i) csv << 0.1 * i << ",1,1,1,6.283185307179586,\n";
    csv.close();
    CHECK(run({"verify", "--trace", (dir / "stalled.csv").string(), "--out", dir.string()}).code == 1);
    CHECK(run({"report", dir.string()}).code == 1);
  }
  SUBCASE("broken speed stops before the flow") {
    const auto r = run({"verify", "--speed", "broken-norm", "--out", dir.string()});
    CHECK(r.code == 1);
    const auto v = read_json(dir / "verdict.json");
    REQUIRE(v.size() == 1);
    CHECK(v[0]["name"] == "speed.conditions");
    CHECK(!fs::exists(dir / "trace.csv"));
  }
  SUBCASE("missing verdict") { CHECK(run({"report", (dir / "nothing").string()}).code == 2); }
}

TEST_CASE("config files and output directory precedence") {
  const auto dir = scratch("config");
  std::ofstream(dir / "mesh.off") << slurp([&] {
    write_mesh(dir / "src.off", icosphere(3));
    return dir / "src.off";
  }());
  {
    std::ofstream cfg(dir / "exp.json");
    cfg << R"({"surface": {"kind": "mesh-file", "path": "mesh.off"},
               "width": {"slice_count": 9, "sweeps": 20},
               "output_dir": "from_config"})";
  }
  const auto cfg = (dir / "exp.json").string();
  // Relative paths resolve against the config; output_dir stays relative to the cwd.
  const auto cwd = fs::current_path();
  fs::current_path(dir);
  CHECK(run({"width", "--config", cfg}).code == 0);
  CHECK(fs::exists(dir / "from_config" / "width.json"));
  setenv("WIDTHFLOW_OUT", (dir / "from_env").c_str(), 1);
  CHECK(run({"width", "--config", cfg}).code == 0);
  CHECK(fs::exists(dir / "from_env" / "width.json"));
  CHECK(run({"width", "--config", cfg, "--out", (dir / "from_flag").string()}).code == 0);
  CHECK(fs::exists(dir / "from_flag" / "width.json"));
  unsetenv("WIDTHFLOW_OUT");
  fs::current_path(cwd);

  std::ofstream(dir / "unknown.json") << R"({"surface": {"kind": "sphere", "colour": 3}})";
  CHECK(run({"width", "--config", (dir / "unknown.json").string()}).code == 2);
  std::ofstream(dir / "range.json") << R"({"control": {"safety": 4}})";
  CHECK(run({"flow", "--config", (dir / "range.json").string()}).code == 2);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run({"flow", "--config", (dir / "broken.json").string()}).code == 2);
  CHECK(run({"flow", "--config", (dir / "absent.json").string()}).code == 2);
}

TEST_CASE("determinism: identical inputs give identical bytes") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  for (const auto& [dir, jobs] : {std::pair{a, "1"}, std::pair{b, "3"}}) {
    REQUIRE(run({"flow", "--intervals", "40", "--width-probes", "--slices", "9", "--sweeps", "20",
                 "--probe-interval", "0.1", "--jobs", jobs, "--out", (dir / "flow").string()})
                .code == 0);
    REQUIRE(run({"width", "--random-axes", "3", "--seed", "9", "--jobs", jobs, "--out",
                 (dir / "width").string()})
                .code == 0);
    REQUIRE(run({"check-speed", "--name", "harmonic-mean", "--samples", "500", "--seed", "4",
                 "--out", (dir / "speed").string()})
                .code == 0);
  }
  for (const char* f : {"flow/trace.csv", "flow/trace.json", "width/width.json", "speed/speed.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
}
