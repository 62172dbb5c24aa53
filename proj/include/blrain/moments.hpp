#pragma once

#include <array>
#include <span>
#include <vector>

#include "blrain/model.hpp"

namespace blrain {

/// E[eta^-k exp(-eta s)] for eta ~ Gamma(shape alpha, rate nu):
///   nu^alpha Gamma(alpha - k) / (Gamma(alpha) (nu + s)^(alpha - k)).
/// Evaluated in log space. Throws AlphaTooSmall unless alpha > k (with the
/// kAlphaGuard margin).
double gamma_expectation(int k, double s, double alpha, double nu);

/// Second and third order moments of the depth accumulated over consecutive
/// intervals of width h.
struct AggregatedMoments {
  double h = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> autocov;  // autocov[k - 1] = Cov(Y_i, Y_{i+k}), k >= 1
  double third_central = 0.0;

  double autocov_at(int lag) const { return autocov.at(static_cast<std::size_t>(lag - 1)); }
};

AggregatedMoments blipr_moments(const BliprParams& p, const IntensityLaw& law, PulseDepthDependence dep,
                                double h, int max_lag = 1);

/// The depth law's family and shape are used; its mean is replaced by
/// iota * eta per cell, so only f1 and f2 enter.
AggregatedMoments blrprx_moments(const BlrprXParams& p, const IntensityLaw& law, double h, int max_lag = 1);

/// Dispatches to the closed forms. Throws InvalidArgument for variants that
/// are supported through simulation only.
AggregatedMoments analytic_moments(const ModelParams& p, const IntensityLaw& law, PulseDepthDependence dep,
                                   double h, int max_lag = 1);

bool has_closed_form(Variant v);

struct ScaleProperties {
  double cv;
  double skewness;
  double lag1_ac;
};

/// Throws ZeroVariance when m.variance <= 0 and requires max_lag >= 1.
ScaleProperties to_scale_properties(const AggregatedMoments& m);

// ---------------------------------------------------------------------------
// Fitting properties: the 1-h mean plus cv, lag-1 autocorrelation and
// skewness at 5 min, 1 h, 6 h and 24 h.

inline constexpr std::array<double, 4> kTimescales{1.0 / 12.0, 1.0, 6.0, 24.0};
inline constexpr std::size_t kPropertyCount = 1 + 3 * kTimescales.size();

/// Names in vector order: mean_1h, then cv_<h>, ac1_<h>, skew_<h> per scale.
std::span<const std::string_view> property_names();
std::string_view timescale_label(double h);

struct FittingProperties {
  double mean_1h = 0.0;
  std::array<ScaleProperties, kTimescales.size()> scales{};

  std::array<double, kPropertyCount> to_array() const;
};

FittingProperties to_fitting_properties(std::span<const AggregatedMoments, kTimescales.size()> per_scale);

/// tau(theta): analytic fitting properties of a closed-form variant.
FittingProperties model_fitting_properties(const ModelParams& p, const IntensityLaw& law,
                                           PulseDepthDependence dep);

namespace detail {

/// One monomial c * f1^a * f2^b * kappa^c * phi^d (* h) of the rectangular
/// dependent-intensity third moment.
struct Monomial {
  double coef;
  int f1;
  int f2;
  int kappa;
  int phi;
  bool times_h;
};

/// A group of monomials sharing the factor E[eta^-k exp(-eta s)] with
/// s = (s_const + s_phi * phi) * h. The group with k = 0 and s = 0 carries
/// no kernel factor.
struct KernelBlock {
  int k;
  double s_const;
  double s_phi;
  std::span<const Monomial> terms;
};

std::span<const KernelBlock> blrprx_third_moment_blocks();

}  // namespace detail

}  // namespace blrain
