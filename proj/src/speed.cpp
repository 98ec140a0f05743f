#include "widthflow/speed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "widthflow/error.hpp"
#include "widthflow/random.hpp"

namespace widthflow {

std::string_view to_string(SpeedShape shape) {
  switch (shape) {
    case SpeedShape::Convex: return "convex";
    case SpeedShape::Concave: return "concave";
    case SpeedShape::Linear: return "linear";
  }
  return "unknown";
}

std::string_view to_string(ShapeVerdict verdict) {
  switch (verdict) {
    case ShapeVerdict::Convex: return "convex";
    case ShapeVerdict::Concave: return "concave";
    case ShapeVerdict::Linear: return "linear";
    case ShapeVerdict::Indefinite: return "indefinite";
  }
  return "unknown";
}

SpeedSpec::SpeedSpec(std::string name, int n, int degree, SpeedShape shape,
                     Evaluator evaluator, Gradient gradient)
    : name_(std::move(name)),
      n_(n),
      degree_(degree),
      shape_(shape),
      evaluator_(std::move(evaluator)),
      gradient_(std::move(gradient)) {
  if (n_ < 2 || n_ > kMaxCurvatureCount) {
    throw Error(ErrorKind::InvalidArgument,
                "speed '" + name_ + "': curvature count must be in [2, 64]");
  }
  if (degree_ < 1) {
    throw Error(ErrorKind::InvalidArgument, "speed '" + name_ + "': degree must be >= 1");
  }
  if (!evaluator_) {
    throw Error(ErrorKind::InvalidArgument, "speed '" + name_ + "': missing evaluator");
  }
}

namespace {

using Buffer = std::array<double, kMaxCurvatureCount>;

// Sorted copy of lambda; reductions over it are independent of input order.
// Two entries need no sorting: every reduction used here is commutative.
std::span<const double> sorted(std::span<const double> lambda, Buffer& buf) {
  if (lambda.size() <= 2) return lambda;
  std::copy(lambda.begin(), lambda.end(), buf.begin());
  std::sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(lambda.size()));
  return {buf.data(), lambda.size()};
}

double sorted_mean(std::span<const double> lambda) {
  Buffer buf;
  auto s = sorted(lambda, buf);
  double sum = 0.0;
  for (double v : s) sum += v;
  return sum / static_cast<double>(s.size());
}

double int_pow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

SpeedSpec arithmetic_mean(int n) {
  return SpeedSpec(
      "arithmetic-mean", n, 1, SpeedShape::Linear,
      [](std::span<const double> l) { return sorted_mean(l); },
      [](std::span<const double> l, std::span<double> g) {
        std::fill(g.begin(), g.end(), 1.0 / static_cast<double>(l.size()));
      });
}

SpeedSpec power_mean(int n, double p) {
  if (!(p >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "power mean requires p >= 1");
  }
  // p = 2 (the default) avoids std::pow entirely.
  auto eval = [p](std::span<const double> l) {
    Buffer buf;
    double sum = 0.0;
    if (p == 2.0) {
      for (double v : sorted(l, buf)) sum += v * v;
      return std::sqrt(sum / static_cast<double>(l.size()));
    }
    for (double v : sorted(l, buf)) sum += std::pow(v, p);
    return std::pow(sum / static_cast<double>(l.size()), 1.0 / p);
  };
  auto grad = [p, eval](std::span<const double> l, std::span<double> g) {
    const double m = eval(l);
    const double nn = static_cast<double>(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
      g[i] = (p == 2.0 ? l[i] / m : std::pow(l[i] / m, p - 1.0)) / nn;
    }
  };
  return SpeedSpec("power-mean", n, 1, SpeedShape::Convex, eval, grad);
}

SpeedSpec geometric_mean(int n) {
  auto eval = [](std::span<const double> l) {
    if (l.size() == 2) return std::sqrt(l[0] * l[1]);
    Buffer buf;
    double log_sum = 0.0;
    for (double v : sorted(l, buf)) log_sum += std::log(v);
    return std::exp(log_sum / static_cast<double>(l.size()));
  };
  auto grad = [eval](std::span<const double> l, std::span<double> g) {
    const double f = eval(l);
    const double nn = static_cast<double>(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) g[i] = f / (nn * l[i]);
  };
  return SpeedSpec("geometric-mean", n, 1, SpeedShape::Concave, eval, grad);
}

SpeedSpec harmonic_mean(int n) {
  auto eval = [](std::span<const double> l) {
    Buffer buf;
    double inv_sum = 0.0;
    for (double v : sorted(l, buf)) inv_sum += 1.0 / v;
    return static_cast<double>(l.size()) / inv_sum;
  };
  auto grad = [eval](std::span<const double> l, std::span<double> g) {
    const double f = eval(l);
    const double nn = static_cast<double>(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) g[i] = f * f / (nn * l[i] * l[i]);
  };
  return SpeedSpec("harmonic-mean", n, 1, SpeedShape::Concave, eval, grad);
}

SpeedSpec arithmetic_mean_power(int n, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "mean power requires k >= 1");
  auto eval = [k](std::span<const double> l) { return int_pow(sorted_mean(l), k); };
  auto grad = [k](std::span<const double> l, std::span<double> g) {
    const double d = k * int_pow(sorted_mean(l), k - 1) / static_cast<double>(l.size());
    std::fill(g.begin(), g.end(), d);
  };
  return SpeedSpec("mean-power", n, k, k == 1 ? SpeedShape::Linear : SpeedShape::Convex,
                   eval, grad);
}

SpeedSpec broken_asymmetric(int n) {
  return SpeedSpec("broken-asym", n, 1, SpeedShape::Linear,
                   [](std::span<const double> l) { return l[0]; });
}

SpeedSpec broken_normalization(int n) {
  return SpeedSpec("broken-norm", n, 1, SpeedShape::Linear,
                   [](std::span<const double> l) { return 2.0 * sorted_mean(l); });
}

std::vector<std::string> builtin_speed_names() {
  return {"arithmetic-mean", "power-mean", "geometric-mean", "harmonic-mean",
          "mean-power",      "broken-asym", "broken-norm"};
}

SpeedSpec speed_by_name(std::string_view name, int n, int k, double p) {
  if (name == "arithmetic-mean") return arithmetic_mean(n);
  if (name == "power-mean") return power_mean(n, p);
  if (name == "geometric-mean") return geometric_mean(n);
  if (name == "harmonic-mean") return harmonic_mean(n);
  if (name == "mean-power") return arithmetic_mean_power(n, k);
  if (name == "broken-asym") return broken_asymmetric(n);
  if (name == "broken-norm") return broken_normalization(n);
  throw Error(ErrorKind::InvalidArgument, "unknown speed '" + std::string(name) + "'");
}

namespace {

void require_cone(const SpeedSpec& spec, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != spec.n()) {
    throw Error(ErrorKind::DimensionMismatch,
                "speed '" + spec.name() + "' expects " + std::to_string(spec.n()) +
                    " curvatures, got " + std::to_string(lambda.size()));
  }
  for (double v : lambda) {
    if (!(v > 0.0)) {
      throw Error(ErrorKind::NonPositiveCurvature,
                  "curvature " + std::to_string(v) + " outside the positive cone");
    }
  }
}

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double evaluate(const SpeedSpec& spec, std::span<const double> lambda) {
  require_cone(spec, lambda);
  return spec(lambda);
}

std::vector<double> gradient(const SpeedSpec& spec, std::span<const double> lambda,
                             double step) {
  require_cone(spec, lambda);
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "gradient step must be > 0");
  std::vector<double> g(lambda.size());
  Buffer probe;
  std::copy(lambda.begin(), lambda.end(), probe.begin());
  std::span<const double> view(probe.data(), lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] - step > 0.0)) {
      throw Error(ErrorKind::NonPositiveCurvature,
                  "finite-difference stencil leaves the positive cone");
    }
    probe[i] = lambda[i] + step;
    const double up = spec(view);
    probe[i] = lambda[i] - step;
    const double down = spec(view);
    probe[i] = lambda[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

std::vector<double> gradient(const SpeedSpec& spec, std::span<const double> lambda) {
  return gradient(spec, lambda, 1e-5 * euclidean_norm(lambda));
}

void partials(const SpeedSpec& spec, std::span<const double> lambda, std::span<double> out) {
  if (spec.has_analytic_gradient()) {
    spec.analytic_gradient(lambda, out);
    return;
  }
  const auto g = gradient(spec, lambda);
  std::copy(g.begin(), g.end(), out.begin());
}

bool ConditionReport::conforms(const SpeedSpec& spec, double tol) const {
  bool shape_ok = false;
  switch (spec.shape()) {
    case SpeedShape::Linear: shape_ok = shape_verdict == ShapeVerdict::Linear; break;
    case SpeedShape::Convex:
      shape_ok = shape_verdict == ShapeVerdict::Convex || shape_verdict == ShapeVerdict::Linear;
      break;
    case SpeedShape::Concave:
      shape_ok =
          shape_verdict == ShapeVerdict::Concave || shape_verdict == ShapeVerdict::Linear;
      break;
  }
  return samples_used > 0 && symmetry_max_violation <= tol &&
         monotonicity_min_derivative > 0.0 &&
         std::abs(measured_degree - spec.degree()) <= tol &&
         homogeneity_max_violation <= tol && normalization_error <= tol && shape_ok &&
         lower_bound_max_violation <= tol;
}

namespace {

void sample_point(SampleRng& rng, const SamplingBox& box, std::span<double> out) {
  for (double& v : out) v = std::exp(rng.uniform(box.log_min, box.log_max));
}

// Streams for the different checks are separated so that adding a check never
// perturbs the samples drawn by another.
enum Stream : std::uint64_t {
  kSymmetry = 1,
  kMonotone = 2,
  kHomogeneity = 3,
  kShape = 4,
  kLowerBound = 5,
};

std::uint64_t stream_seed(std::uint64_t seed, Stream stream) {
  return seed * 0x100000001b3ULL + stream;
}

}  // namespace

ConditionReport check_conditions(const SpeedSpec& spec, int sample_count,
                                 std::uint64_t rng_seed, double tol, SamplingBox box) {
  if (sample_count < 1) throw Error(ErrorKind::InvalidArgument, "sample_count must be >= 1");
  const auto n = static_cast<std::size_t>(spec.n());
  const double k = spec.degree();
  ConditionReport report;
  report.samples_used = sample_count;
  report.monotonicity_min_derivative = std::numeric_limits<double>::infinity();
  report.measured_degree = k;

  Buffer a, b, c;
  std::span<double> la(a.data(), n), lb(b.data(), n), lc(c.data(), n);
  int convex_hits = 0;
  int concave_hits = 0;
  double worst_degree_gap = -1.0;

  for (int s = 0; s < sample_count; ++s) {
    const auto idx = static_cast<std::uint64_t>(s);
    {
      SampleRng rng(stream_seed(rng_seed, kSymmetry), idx);
      sample_point(rng, box, la);
      std::copy(la.begin(), la.end(), lb.begin());
      for (std::size_t i = n - 1; i > 0; --i) std::swap(lb[i], lb[rng.below(i + 1)]);
      const double f = spec(la);
      report.symmetry_max_violation =
          std::max(report.symmetry_max_violation, std::abs(spec(lb) - f) / std::abs(f));
    }
    {
      SampleRng rng(stream_seed(rng_seed, kMonotone), idx);
      sample_point(rng, box, la);
      for (double g : gradient(spec, la)) {
        report.monotonicity_min_derivative = std::min(report.monotonicity_min_derivative, g);
      }
    }
    {
      SampleRng rng(stream_seed(rng_seed, kHomogeneity), idx);
      sample_point(rng, box, la);
      const double log_c = rng.uniform(std::log(1e-3), std::log(1e3));
      const double scale = std::exp(log_c);
      for (std::size_t i = 0; i < n; ++i) lb[i] = scale * la[i];
      const double ratio = spec(lb) / spec(la);
      const double expected = std::pow(scale, k);
      report.homogeneity_max_violation =
          std::max(report.homogeneity_max_violation, std::abs(ratio - expected) / expected);
      if (std::abs(log_c) > 1e-3) {
        const double degree = std::log(ratio) / log_c;
        if (std::abs(degree - k) > worst_degree_gap) {
          worst_degree_gap = std::abs(degree - k);
          report.measured_degree = degree;
        }
      }
    }
    {
      // Midpoint inequality along a random segment.
      SampleRng rng(stream_seed(rng_seed, kShape), idx);
      sample_point(rng, box, la);
      sample_point(rng, box, lb);
      for (std::size_t i = 0; i < n; ++i) lc[i] = 0.5 * (la[i] + lb[i]);
      const double chord = 0.5 * (spec(la) + spec(lb));
      const double gap = (spec(lc) - chord) / chord;
      if (gap < -tol) ++convex_hits;
      if (gap > tol) ++concave_hits;
    }
  }

  std::fill(la.begin(), la.end(), 1.0);
  report.normalization_error = std::abs(spec(la) - 1.0);

  if (convex_hits > 0 && concave_hits > 0) {
    report.shape_verdict = ShapeVerdict::Indefinite;
  } else if (convex_hits > 0) {
    report.shape_verdict = ShapeVerdict::Convex;
  } else if (concave_hits > 0) {
    report.shape_verdict = ShapeVerdict::Concave;
  } else {
    report.shape_verdict = ShapeVerdict::Linear;
  }

  if (spec.shape() != SpeedShape::Concave) {
    report.lower_bound_max_violation = check_lower_bound(spec, sample_count, rng_seed, false, box);
  }
  return report;
}

double check_lower_bound(const SpeedSpec& spec, int sample_count, std::uint64_t rng_seed,
                         bool allow_concave, SamplingBox box) {
  if (spec.shape() == SpeedShape::Concave && !allow_concave) {
    throw Error(ErrorKind::ShapeHypothesisUnmet,
                "mean lower bound requires a convex or linear speed; '" + spec.name() +
                    "' is declared concave");
  }
  if (sample_count < 1) throw Error(ErrorKind::InvalidArgument, "sample_count must be >= 1");
  const auto n = static_cast<std::size_t>(spec.n());
  Buffer a;
  std::span<double> la(a.data(), n);
  double worst = 0.0;
  for (int s = 0; s < sample_count; ++s) {
    SampleRng rng(stream_seed(rng_seed, kLowerBound), static_cast<std::uint64_t>(s));
    sample_point(rng, box, la);
    const double bound = int_pow(sorted_mean(la), spec.degree());
    worst = std::max(worst, (bound - spec(la)) / bound);
  }
  return worst;
}

}  // namespace widthflow
