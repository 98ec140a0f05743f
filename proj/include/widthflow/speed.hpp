#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace widthflow {

// Declared curvature-shape of a speed function on the positive cone.
enum class SpeedShape { Convex, Concave, Linear };

// Shape inferred from sampling; Indefinite means both signs were observed.
enum class ShapeVerdict { Convex, Concave, Linear, Indefinite };

std::string_view to_string(SpeedShape shape);
std::string_view to_string(ShapeVerdict verdict);

inline constexpr int kMaxCurvatureCount = 64;

// A symmetric curvature speed F defined on the positive cone of R^n, with
// declared homogeneity degree and shape. Immutable after construction.
class SpeedSpec {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;
  using Gradient = std::function<void(std::span<const double>, std::span<double>)>;

  SpeedSpec(std::string name, int n, int degree, SpeedShape shape,
            Evaluator evaluator, Gradient gradient = {});

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  int degree() const { return degree_; }
  SpeedShape shape() const { return shape_; }

  // Unchecked evaluation; callers guarantee lambda lies in the cone.
  double operator()(std::span<const double> lambda) const { return evaluator_(lambda); }

  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  void analytic_gradient(std::span<const double> lambda, std::span<double> out) const {
    gradient_(lambda, out);
  }

 private:
  std::string name_;
  int n_;
  int degree_;
  SpeedShape shape_;
  Evaluator evaluator_;
  Gradient gradient_;
};

// Built-in speeds. All use order-independent formulas (inputs are sorted
// before reduction), so permuting lambda never changes a single bit of F.
SpeedSpec arithmetic_mean(int n);
SpeedSpec power_mean(int n, double p);
SpeedSpec geometric_mean(int n);
SpeedSpec harmonic_mean(int n);
SpeedSpec arithmetic_mean_power(int n, int k);

// Negative controls: F = lambda_1 (not symmetric) and F = 2 * mean (violates
// F(1,...,1) = 1).
SpeedSpec broken_asymmetric(int n);
SpeedSpec broken_normalization(int n);

// Name lookup used by configuration files: arithmetic-mean, power-mean,
// geometric-mean, harmonic-mean, mean-power, broken-asym, broken-norm.
SpeedSpec speed_by_name(std::string_view name, int n, int k = 1, double p = 2.0);
std::vector<std::string> builtin_speed_names();

// Validated evaluation: throws NonPositiveCurvature / DimensionMismatch.
double evaluate(const SpeedSpec& spec, std::span<const double> lambda);

// Central-difference gradient with absolute step.
std::vector<double> gradient(const SpeedSpec& spec, std::span<const double> lambda,
                             double step);
// Central-difference gradient with step 1e-5 * |lambda|.
std::vector<double> gradient(const SpeedSpec& spec, std::span<const double> lambda);

// dF/dlambda_i from the analytic gradient when the spec provides one,
// otherwise from central differences.
void partials(const SpeedSpec& spec, std::span<const double> lambda, std::span<double> out);

// Log-uniform sampling box for condition checks: lambda_i = exp(u),
// u uniform in [log_min, log_max].
struct SamplingBox {
  double log_min = -3.0;
  double log_max = 3.0;
};

struct ConditionReport {
  double symmetry_max_violation = 0.0;
  double monotonicity_min_derivative = 0.0;
  double measured_degree = 0.0;
  double homogeneity_max_violation = 0.0;
  double normalization_error = 0.0;
  ShapeVerdict shape_verdict = ShapeVerdict::Linear;
  double lower_bound_max_violation = 0.0;
  int samples_used = 0;

  // True when every sampled condition agrees with the declarations in spec.
  bool conforms(const SpeedSpec& spec, double tol) const;
};

ConditionReport check_conditions(const SpeedSpec& spec, int sample_count,
                                 std::uint64_t rng_seed, double tol,
                                 SamplingBox box = {});

// Max relative violation of F(lambda) >= (sum(lambda)/n)^k over the samples.
// The inequality needs a convex (or linear) F; concave specs throw
// ShapeHypothesisUnmet unless allow_concave is set.
double check_lower_bound(const SpeedSpec& spec, int sample_count, std::uint64_t rng_seed,
                         bool allow_concave = false, SamplingBox box = {});

}  // namespace widthflow
