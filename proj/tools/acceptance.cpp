// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is 0 only when every criterion passes.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "widthflow/verify.hpp"

using namespace widthflow;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

constexpr double kTwoPi = 2.0 * pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Criterion {
  Criterion(int id_, std::string title_) : id(id_), title(std::move(title_)) {}

  int id;
  std::string title;
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + buf);
    pass = pass && ok;
  }
};

void print(const Criterion& c) {
  std::printf("criterion %d [PRIMARY] %s: %s\n", c.id, c.title.c_str(), c.pass ? "PASS" : "FAIL");
  for (const auto& l : c.lines) std::printf("    %s\n", l.c_str());
  std::fflush(stdout);
}

template <typename Fn>
void guarded(Criterion& c, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    c.check(false, "exception: %s", e.what());
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WIDTHFLOW_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Flow runs shared by criteria 3, 4 and 5.
struct ProbedRun {
  std::string label;
  FlowTrace trace;
  double c0 = 1.0;
  double seconds = 0.0;
};

ProbedRun probed_run(const std::string& label, const Surface& s, const SpeedSpec& spec,
                     double probe_interval) {
  WidthProbeOptions opts;  // fixed axes x, y, z
  const ProbeHook hooks[] = {width_probe(opts)};
  StepControl ctl;
  ctl.probe_interval = probe_interval;
  const auto t0 = std::chrono::steady_clock::now();
  ProbedRun r{label, run_flow(s, spec, ctl, hooks), 1.0, 0.0};
  r.seconds = seconds_since(t0);
  r.c0 = spec.shape() == SpeedShape::Concave ? r.trace.c0 : 1.0;
  return r;
}

}  // namespace

int main() {
  std::vector<Criterion> all;

  {
    Criterion c{1, "sphere closed-form extinction times"};
    guarded(c, [&] {
      struct Case {
        SpeedSpec spec;
        double expected;
      };
      const std::vector<Case> cases{{arithmetic_mean(2), 0.5},
                                    {power_mean(2, 2.0), 0.5},
                                    {geometric_mean(2), 0.5},
                                    {harmonic_mean(2), 0.5},
                                    {arithmetic_mean_power(2, 2), 1.0 / 3.0}};
      for (const auto& cs : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto tr = run_flow(sphere_axi(400, 1.0), cs.spec, StepControl{});
        const double secs = seconds_since(t0);
        const double t = tr.extinction_time.value_or(NAN);
        c.check(std::abs(t - cs.expected) <= 1e-3 && secs < 30.0,
                "%-16s k=%d T=%.7f expected %.4f (|err| <= 1e-3), %.1f s (< 30 s)",
                cs.spec.name().c_str(), cs.spec.degree(), t, cs.expected, secs);
      }
    });
    print(c);
    all.push_back(c);
  }

  {
    Criterion c{2, "width oracle on icospheres"};
    guarded(c, [&] {
      const auto axes = default_axes(10, 0);
      double w1 = 0.0;
      for (double radius : {1.0, 2.0}) {
        const auto mesh = icosphere(5, radius);
        const auto t0 = std::chrono::steady_clock::now();
        const auto w = width_estimate(mesh, axes, 33, 200);
        const double secs = seconds_since(t0);
        const double expected = kTwoPi * radius * radius;
        c.check(std::abs(w.value / expected - 1.0) <= 0.03 && secs < 60.0,
                "R=%.0f W=%.6f expected %.6f (rel %.2e <= 3%%), residual %.1e, %.1f s (< 60 s)",
                radius, w.value, expected, w.value / expected - 1.0, w.geodesic_residual, secs);
        if (radius == 1.0) {
          w1 = w.value;
        } else {
          c.check(std::abs(w.value / w1 / 4.0 - 1.0) <= 0.03, "W(R=2)/W(R=1) = %.5f vs 4 (3%%)",
                  w.value / w1);
        }
      }
    });
    print(c);
    all.push_back(c);
  }

  std::vector<ProbedRun> runs;
  {
    Criterion c{3, "width decreases at the proven rate"};
    guarded(c, [&] {
      runs.push_back(probed_run("sphere arithmetic-mean", sphere_axi(100, 1.0), arithmetic_mean(2), 0.05));
      runs.push_back(probed_run("spheroid arithmetic-mean", spheroid_axi(100, 1.0, 2.0), arithmetic_mean(2), 0.05));
      runs.push_back(probed_run("spheroid geometric-mean", spheroid_axi(100, 1.0, 2.0), geometric_mean(2), 0.05));
      const double tol = 0.1 * kTwoPi;
      for (const auto& r : runs) {
        const auto reps = theorem1_check(r.trace, r.c0, tol);
        double worst_margin = INFINITY, qmin = INFINITY, qmax = -INFINITY;
        bool sphere_close = true;
        for (const auto& rep : reps) {
          worst_margin = std::min(worst_margin, rep.margin + rep.tol);
          if (rep.name == "theorem1.integrated") continue;
          qmin = std::min(qmin, rep.lhs);
          qmax = std::max(qmax, rep.lhs);
          sphere_close = sphere_close && std::abs(rep.lhs / (-4 * pi) - 1.0) <= 0.1;
        }
        const bool is_sphere = r.label.rfind("sphere ", 0) == 0;
        c.check(all_pass(reps) && (!is_sphere || sphere_close) && r.seconds < 300.0,
                "%-25s C0=%.4f bound %.4f, %zu quotients in [%.4f, %.4f]%s, min margin+tol %.3f, %.1f s",
                r.label.c_str(), r.c0, -4 * pi / (2 * r.c0), reps.size() - 1, qmin, qmax,
                is_sphere ? (sphere_close ? " (= -4pi within 10%)" : " (NOT -4pi within 10%)") : "",
                worst_margin, r.seconds);
      }
    });
    print(c);
    all.push_back(c);
  }

  {
    Criterion c{4, "extinction time bound"};
    guarded(c, [&] {
      if (runs.empty()) throw std::runtime_error("no runs from criterion 3");
      for (const auto& r : runs) {
        const auto rep = corollary_check(r.trace, r.c0);
        c.check(rep.margin > 0.0, "%-25s T=%.6f <= n C0 W(0)/(4pi) = %.6f, margin %.6f",
                r.label.c_str(), rep.lhs, rep.rhs, rep.margin);
      }
    });
    print(c);
    all.push_back(c);
  }

  {
    Criterion c{5, "pinching ratio non-increasing for concave speeds"};
    guarded(c, [&] {
      std::vector<std::pair<std::string, FlowTrace>> concave;
      for (const auto& r : runs) {
        if (r.label == "spheroid geometric-mean") concave.emplace_back(r.label, r.trace);
      }
      concave.emplace_back("spheroid harmonic-mean",
                           run_flow(spheroid_axi(100, 1.0, 2.0), harmonic_mean(2), StepControl{}));
      for (const auto& [label, tr] : concave) {
        const auto v = check_pinching_monotone(tr, 1e-3);
        c.check(v.pass && tr.samples.size() > 2,
                "%-25s %zu samples, pinching %.4f -> %.4f, max increase %.2e (<= 1e-3)",
                label.c_str(), tr.samples.size(), tr.samples.front().sup_pinching,
                tr.samples.back().sup_pinching, v.max_increase);
      }
    });
    print(c);
    all.push_back(c);
  }

  {
    Criterion c{6, "geodesic energy derivative checks"};
    guarded(c, [&] {
      const auto sphere = icosphere(5);
      const auto spheroid = ellipsoid_mesh(5, 1.0, 1.0, 2.0);
      const auto g_sphere = find_closed_geodesic(sphere);
      const auto g_spheroid = find_closed_geodesic(spheroid);
      for (const auto& [label, mesh, g] :
           {std::tuple{"sphere", &sphere, &g_sphere}, std::tuple{"spheroid", &spheroid, &g_spheroid}}) {
        for (const auto& spec : {arithmetic_mean(2), geometric_mean(2)}) {
          const auto rep = lemma2_check(*mesh, spec, *g, default_derivative_step(*mesh, spec));
          bool chain = true;
          for (const auto& d : rep.details) chain = chain && d.pass;
          c.check(rep.pass && rep.margin > 0.0,
                  "%-8s %-15s dE/dt=%.5f <= %.5f, margin %.4f, chain steps %s", label,
                  spec.name().c_str(), rep.lhs, rep.rhs, rep.margin, chain ? "hold" : "VIOLATED");
        }
      }
      const auto k2 = arithmetic_mean_power(2, 2);
      const auto rep = lemma7_check(sphere, k2, g_sphere, default_derivative_step(sphere, k2));
      const double oracle = -3.0 * std::pow(kTwoPi, 1.5);  // E^{3/2} = (2pi)^{3/2} (1 - 3t)
      c.check(rep.pass && std::abs(rep.lhs / oracle - 1.0) <= 0.01,
              "sphere   mean-power k=2 d(E^1.5)/dt=%.5f vs closed form %.5f (rel %.2e <= 1%%), bound %.5f",
              rep.lhs, oracle, rep.lhs / oracle - 1.0, rep.rhs);
    });
    print(c);
    all.push_back(c);
  }

  {
    Criterion c{7, "property suites and negative controls"};
    guarded(c, [&] {
      for (const auto& spec : {arithmetic_mean(2), power_mean(2, 2.0), geometric_mean(2),
                               harmonic_mean(2), arithmetic_mean_power(2, 2), arithmetic_mean(3),
                               geometric_mean(3)}) {
        const auto r = check_conditions(spec, 10000, 1, 1e-9);
        const bool ok = r.samples_used >= 10000 && r.symmetry_max_violation == 0.0 &&
                        r.homogeneity_max_violation <= 1e-12 && r.monotonicity_min_derivative > 0.0 &&
                        r.lower_bound_max_violation == 0.0;
        // The mean lower bound is a convex-speed statement; concave speeds skip it.
        char lb[32] = "n/a (concave)";
        if (spec.shape() != SpeedShape::Concave) std::snprintf(lb, sizeof lb, "%.1e", r.lower_bound_max_violation);
        c.check(ok, "%-15s n=%d %d samples: symmetry %.1e, homogeneity %.1e, min dF %.2e, lower bound %s",
                spec.name().c_str(), spec.n(), r.samples_used, r.symmetry_max_violation,
                r.homogeneity_max_violation, r.monotonicity_min_derivative, lb);
      }

      long curves = 0, sweeps = 0, monotone_breaks = 0;
      double min_total_curvature = INFINITY;
      for (const auto& mesh : {icosphere(4), ellipsoid_mesh(4, 1.0, 1.5, 2.0)}) {
        const MeshLocator loc(mesh);
        for (const auto& axis : default_axes(2, 5)) {
          const auto sw = build_sweepout(mesh, axis, 17);
          for (const auto& slice : sw.slices) {
            if (slice.is_degenerate) continue;
            std::vector<double> lengths;
            const auto t = birkhoff_tighten(slice, loc, 200, &lengths);
            double prev = curve_length(slice);
            for (double l : lengths) {
              monotone_breaks += l > prev ? 1 : 0;
              prev = l;
            }
            sweeps += static_cast<long>(lengths.size());
            if (!t.is_degenerate) {
              ++curves;
              min_total_curvature = std::min(min_total_curvature, total_curvature(t));
            }
          }
        }
      }
      c.check(min_total_curvature >= kTwoPi - 1e-6,
              "Fenchel: min total curvature %.9f over %ld tightened curves (>= 2pi - 1e-6)",
              min_total_curvature, curves);
      c.check(monotone_breaks == 0, "Birkhoff: %ld length increases over %ld sweeps",
              monotone_breaks, sweeps);

      const auto dir = fs::temp_directory_path() / ("widthflow_acceptance_" + std::to_string(getpid()));
      fs::create_directories(dir);
      for (const char* broken : {"broken-asym", "broken-norm"}) {
        const int code = run_cli(std::string("check-speed --name ") + broken + " --out " + dir.string());
        c.check(code != 0, "check-speed --name %s exits %d", broken, code);
      }
      {
        std::ofstream csv(dir / "stalled.csv");
        csv << "t,inradius,sup_pinching,max_speed,width,dwdt_quotient\n";
        for (int i = 0; i < 6; ++i) csv << 0.1 * i << ",1,1,1,6.2831853071795862,\n";
      }
      const int code = run_cli("verify --trace " + (dir / "stalled.csv").string() + " --out " + dir.string());
      c.check(code != 0, "verify on a stalled width trace exits %d", code);
      fs::remove_all(dir);
    });
    print(c);
    all.push_back(c);
  }

  {
    Criterion c{8, "determinism"};
    guarded(c, [&] {
      const auto root = fs::temp_directory_path() / ("widthflow_determinism_" + std::to_string(getpid()));
      const std::vector<std::string> commands{
          "flow --intervals 60 --width-probes --probe-interval 0.1 --seed 7",
          "width --random-axes 4 --seed 7",
          "check-speed --name geometric-mean --samples 3000 --seed 7",
          "verify --surface spheroid --speed harmonic-mean --intervals 60 --seed 7"};
      for (int rep = 0; rep < 2; ++rep) {
        for (std::size_t i = 0; i < commands.size(); ++i) {
          const auto out = root / std::to_string(rep) / std::to_string(i);
          const int code = run_cli(commands[i] + " --jobs " + (rep == 0 ? "1" : "2") + " --out " + out.string());
          if (code != 0) c.check(false, "'%s' exited %d", commands[i].c_str(), code);
        }
      }
      int files = 0, differing = 0;
      for (const auto& entry : fs::recursive_directory_iterator(root / "0")) {
        const auto ext = entry.path().extension();
        if (ext != ".csv" && ext != ".json") continue;
        ++files;
        const auto other = root / "1" / fs::relative(entry.path(), root / "0");
        if (slurp(entry.path()) != slurp(other)) {
          ++differing;
          c.check(false, "%s differs", fs::relative(entry.path(), root / "0").c_str());
        }
      }
      c.check(differing == 0 && files >= 6,
              "%d CSV/JSON files byte-identical across two runs (jobs 1 vs 2)", files - differing);
      fs::remove_all(root);
    });
    print(c);
    all.push_back(c);
  }

  int passed = 0;
  for (const auto& c : all) passed += c.pass ? 1 : 0;
  std::printf("%d/%zu criteria pass\n", passed, all.size());
  return passed == static_cast<int>(all.size()) ? 0 : 1;
}
