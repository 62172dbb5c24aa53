#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "blrain/empirical.hpp"
#include "blrain/model.hpp"
#include "json.hpp"

namespace blrain {

/// Weighted least-squares calibration problem for one calendar month.
struct ObjectiveSpec {
  Variant variant = Variant::BLRPR_X;
  IntensityLaw law{};
  PulseDepthDependence dep = PulseDepthDependence::Independent;
  StatisticVector target;
  ConstraintSet constraints{};
  /// Parameters held at a value, by field name (e.g. mu_x = 0.001).
  std::map<std::string, double> fixed;
};

/// Throws InvalidArgument unless the variant has closed-form moments, the
/// target has kPropertyCount entries with positive weights, fixed names are
/// fields, and fewer parameters are free than properties.
void check_spec(const ObjectiveSpec& spec);

/// S = sum w_i (T_i - tau_i)^2.
double objective(std::span<const double> target, std::span<const double> weights, std::span<const double> tau);

/// S(theta | T). Parameter sets violating the constraints, or whose moments
/// do not exist, score +infinity; `penalized` reports that case.
double objective(const ModelParams& theta, const ObjectiveSpec& spec, bool* penalized = nullptr);

/// Map between a full parameter set and the unconstrained optimizer vector:
/// log of each free parameter, log(alpha - alpha_min) for alpha.
class ParameterTransform {
 public:
  explicit ParameterTransform(const ObjectiveSpec& spec);

  std::size_t free_count() const { return free_.size(); }
  std::span<const std::size_t> free_indices() const { return free_; }
  std::string_view free_name(std::size_t i) const;

  /// Applies the fixed values to `p` before transforming.
  std::vector<double> to_free(const ModelParams& p) const;
  ModelParams from_free(std::span<const double> z) const;
  /// `p` with the fixed parameters overwritten.
  ModelParams apply_fixed(const ModelParams& p) const;

 private:
  Variant variant_;
  double alpha_min_;
  std::vector<double> fixed_values_;  // NaN where free
  std::vector<std::size_t> free_;
  std::optional<std::size_t> alpha_index_;
};

struct FitOptions {
  int n_starts = 20;            // Nelder-Mead multistarts
  double perturb_sigma = 0.4;   // lognormal perturbation about the start
  int n_refine = 5;             // quasi-Newton refinements
  double rel_tol = 1e-8;
  int max_iter = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;         // 0 = hardware concurrency
  /// Move a start with alpha <= alpha_min into the interior instead of
  /// failing with NoFeasibleStart.
  bool project_start = false;
};

enum class FitStatus { Converged, NonConvergence };

std::string_view to_string(FitStatus s);

struct ConfidenceInterval {
  std::string name;
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool lower_bracketed = false;
  bool upper_bracketed = false;

  bool bracketed() const { return lower_bracketed && upper_bracketed; }
  /// Throws ThresholdNotBracketed when either side is open.
  void require_bracketed() const;
};

/// Asymptotic covariance of the log free parameters.
struct ParamCovariance {
  std::vector<std::string> names;
  std::vector<double> center;  // log theta-hat
  std::vector<double> matrix;  // row-major
  /// (J'WJ)^-1: the covariance implied when the weights are taken as
  /// optimal; row-major.
  std::vector<double> naive;

  std::size_t size() const { return names.size(); }
  double at(std::size_t i, std::size_t j) const { return matrix[i * names.size() + j]; }
  double standard_error(std::size_t i) const;
};

struct FitResult {
  int month = 0;
  ModelParams theta;
  double objective = 0.0;
  FitStatus status = FitStatus::NonConvergence;
  long evaluations = 0;
  long penalties = 0;
  std::vector<double> stage1;  // best value of each start, in start order
  std::vector<double> stage2;  // value after each refinement
  double alpha_min = 1.0;
  std::map<std::string, double> fixed;
  std::vector<ConfidenceInterval> intervals;
  std::optional<ParamCovariance> covariance;

  Variant variant() const { return variant_of(theta); }
};

nlohmann::json to_json(const FitResult& r);
FitResult fit_result_from_json(const nlohmann::json& j);

/// Two-stage fit: Nelder-Mead from the start and n_starts - 1 perturbed
/// copies, then quasi-Newton refinement of the best. Throws NoFeasibleStart.
FitResult fit(const ObjectiveSpec& spec, const ModelParams& start, const FitOptions& opts = {});

struct ProfilePoint {
  double value;
  double objective;  // +infinity when the point failed
  bool ok;
  std::string message;
};

struct ProfileCurve {
  std::string name;
  std::size_t index = 0;  // field index
  double estimate = 0.0;
  double fit_objective = 0.0;
  std::vector<ProfilePoint> points;  // ascending values
  double scale = 1.0;                // multiplier applied to S_p - S(theta-hat)
};

/// S_p(v): the objective minimized over the remaining parameters with field
/// `index` held at each grid value. Failed points are marked, not thrown.
ProfileCurve profile(const ObjectiveSpec& spec, const FitResult& fit, std::size_t index, std::span<const double> grid,
                     const FitOptions& opts = {});

/// Log-uniform grid of 2 * half_points + 1 values centered on `estimate`.
std::vector<double> profile_grid(double estimate, double log_half_width, int half_points);

/// Profile on a grid that widens until the threshold is crossed on both
/// sides or `max_log_half_width` is reached.
ProfileCurve auto_profile(const ObjectiveSpec& spec, const FitResult& fit, std::size_t index,
                          const FitOptions& opts = {}, double log_half_width = 0.5, int half_points = 8,
                          double max_log_half_width = 3.0, double threshold_offset = 3.841 / 2.0);

/// Scale c making 2 c [S_p - S(theta-hat)] asymptotically chi-square(1) under
/// the diagonal (non-optimal) weights: c = naive_pp / (2 sandwich_pp).
/// Throws InvalidArgument when `name` has no covariance entry and
/// SingularCurvature when its variance is not positive.
double profile_scale(const ParamCovariance& cov, std::string_view name);

/// Copy of `curve` with S_p replaced by S + c (S_p - S), S = S(theta-hat).
ProfileCurve scale_profile(const ProfileCurve& curve, double c);

/// Region where S_p <= min + threshold_offset, grown from the grid point
/// nearest the estimate; endpoints interpolated linearly in log value.
ConfidenceInterval confidence_interval(const ProfileCurve& curve, double threshold_offset = 3.841 / 2.0);

void write_profile_csv(std::ostream& out, const ProfileCurve& curve);

/// Sandwich covariance A^-1 B A^-1 with A = J'WJ, B = J'W Var(T) WJ and J
/// the central-difference Jacobian of tau over log parameters. Throws
/// SingularCurvature.
ParamCovariance parameter_covariance(const ObjectiveSpec& spec, const FitResult& fit, double step = 1e-5);

/// Seeded multivariate-normal sampler over log parameters.
class ParameterSampler {
 public:
  ParameterSampler(const FitResult& fit, const ParamCovariance& cov);

  /// Draw of the log free parameters.
  std::vector<double> draw_log(std::mt19937_64& rng) const;
  /// Parameter set with the free parameters drawn; draws violating
  /// alpha > alpha_min are redrawn.
  ModelParams draw(std::mt19937_64& rng) const;

 private:
  ModelParams base_;
  double alpha_min_;
  std::vector<std::size_t> indices_;
  std::vector<double> center_;
  std::vector<double> chol_;  // lower triangular, row-major
};

}  // namespace blrain
