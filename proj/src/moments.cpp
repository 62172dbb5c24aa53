#include "blrain/moments.hpp"

#include <cmath>
#include <string>

#include "blrain/error.hpp"

namespace blrain {

double gamma_expectation(int k, double s, double alpha, double nu) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "k", "kernel order must be non-negative");
  if (!(s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "s", "kernel lag must be non-negative");
  if (!(nu > 0.0)) throw Error(ErrorCode::InvalidArgument, "nu", "nu must be positive");
  if (!(alpha - k > kAlphaGuard)) {
    throw Error(ErrorCode::AlphaTooSmall, "alpha",
                "E[eta^-" + std::to_string(k) + " exp(-eta s)] needs alpha > " + std::to_string(k) +
                    " (alpha = " + std::to_string(alpha) + ")");
  }
  if (k == 0) return std::pow(nu / (nu + s), alpha);
  const double a_k = alpha - k;
  const double log_value =
      alpha * std::log(nu) + std::lgamma(a_k) - std::lgamma(alpha) - a_k * std::log(nu + s);
  return std::exp(log_value);
}

namespace {

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidArgument, name, std::string(name) + " must be positive");
  }
}

void require_non_negative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidArgument, name, std::string(name) + " must be non-negative");
  }
}

// Evaluates f at x, or interpolates across [pole - w, pole + w] when x falls
// inside that window around a removable singularity of f.
template <class F>
double bridge_pole(F&& f, double x, double pole, double w = 1e-3) {
  if (std::abs(x - pole) >= w) return f(x);
  const double lo = f(pole - w), hi = f(pole + w);
  const double t = (x - (pole - w)) / (2.0 * w);
  return (1.0 - t) * lo + t * hi;
}

void require_alpha_above_one(double alpha) {
  if (!(alpha - 1.0 > kAlphaGuard)) {
    throw Error(ErrorCode::AlphaTooSmall, "alpha", "moments need alpha > 1 (alpha = " + std::to_string(alpha) + ")");
  }
}

}  // namespace

AggregatedMoments blipr_moments(const BliprParams& p, const IntensityLaw& law, PulseDepthDependence dep, double h,
                                int max_lag) {
  require_positive(h, "h");
  require_non_negative(p.lambda, "lambda");
  require_non_negative(p.mu_x, "mu_x");
  require_positive(p.nu, "nu");
  require_positive(p.kappa, "kappa");
  require_positive(p.phi, "phi");
  require_positive(p.omega, "omega");
  require_alpha_above_one(p.alpha);

  const auto m = intensity_moments(law.with_mean(p.mu_x));
  const auto pm = pulse_product_moments(dep, m);
  const double lambda = p.lambda, mu = p.mu_x, alpha = p.alpha, nu = p.nu;
  const double kappa = p.kappa, phi = p.phi, omega = p.omega;
  const double a1 = alpha - 1.0;
  const auto K1 = [&](double s) { return gamma_expectation(1, s, alpha, nu); };

  const double mu_p = kappa * omega / (phi * (phi + 1.0));

  AggregatedMoments out;
  out.h = h;
  out.mean = lambda * mu_p * mu * h;

  // Pair-moment excess shared by the variance and covariance.
  const double pair_excess = pm.pair - mu * mu * kappa * phi / (phi + 2.0);
  const double c_storm = phi;
  const double c_cell = phi + 1.0;

  out.variance =
      lambda * mu_p *
      (m.m2 * h + 2.0 * mu * mu * kappa * omega / (phi * phi) * (K1(c_storm * h) - K1(0.0) + c_storm * h) +
       2.0 * omega / (c_cell * c_cell) * pair_excess * (K1(c_cell * h) - K1(0.0) + c_cell * h));

  out.autocov.reserve(static_cast<std::size_t>(std::max(max_lag, 0)));
  for (int k = 1; k <= max_lag; ++k) {
    const auto second_diff = [&](double c) {
      return K1(c * (k - 1) * h) - 2.0 * K1(c * k * h) + K1(c * (k + 1) * h);
    };
    out.autocov.push_back(lambda * mu_p * omega *
                          (mu * mu * kappa / (phi * phi) * second_diff(c_storm) +
                           pair_excess * second_diff(c_cell) / (c_cell * c_cell)));
  }

  const double r = nu / (nu + (1.0 + phi) * h);
  const double q = nu / (nu + phi * h);
  const double t = nu / (nu + (2.0 + phi) * h);
  const double ra1 = std::pow(r, a1), qa1 = std::pow(q, a1), ta1 = std::pow(t, a1);
  const double mu3k2 = mu * mu * mu * kappa * kappa;
  const double pair_mu_k = pm.pair * mu * kappa;
  const double op = 1.0 + phi, tp = 2.0 + phi;

  double third = 0.0;
  third += 6.0 / (op * op * op) * (pm.triple / phi + 2.0 * pair_mu_k / (phi * tp) - mu3k2 / tp) *
           (h - 2.0 * nu / (a1 * op) + 2.0 * nu / (op * a1) * ra1 + h * std::pow(r, alpha));
  third += 6.0 / (op * tp * tp) * (-2.0 * pair_mu_k / op + mu3k2 / (3.0 + phi)) *
           (h - nu / a1 * ((3.0 + 2.0 * phi) / (op * tp) - (tp / op) * ra1 + (op / tp) * ta1));
  third += 6.0 * mu3k2 / (phi * phi * phi * op) *
           (h - 2.0 * nu / (phi * a1) + 2.0 * nu / (phi * a1) * qa1 + h * std::pow(q, alpha));
  third += 6.0 / (phi * op * op) * (2.0 * pair_mu_k / phi - mu3k2 / tp) *
           (h - nu / a1 * ((1.0 + 2.0 * phi) / (phi * op) - (op / phi) * qa1 + (phi / op) * ra1));
  third += 6.0 * pm.square_pair / (omega * phi * op * op) * (h - nu / (op * a1) * (1.0 - ra1));
  third += 6.0 * m.m2 * mu * kappa / (omega * phi * phi * op) *
           (h - nu / (phi * a1) + nu / (phi * a1) * qa1 -
            phi * phi / (op * tp) * (h - nu / (op * a1) + nu / (op * a1) * ra1));
  third += m.m3 * h / (omega * omega * phi * op);
  out.third_central = lambda * kappa * omega * omega * omega * third;
  return out;
}

namespace detail {
namespace {

// Coefficient tables for the third central moment of the rectangular model
// with mean intensity iota * eta. Field order: coef, f1, f2, kappa, phi, h.
constexpr Monomial kK1h[] = {
    {12, 0, 0, 2, 7, false},   {-24, 1, 0, 1, 2, false}, {-18, 0, 0, 2, 4, false}, {24, 1, 0, 1, 3, false},
    {-132, 1, 0, 1, 6, false}, {150, 1, 0, 1, 4, false}, {-42, 0, 0, 2, 5, false}, {-6, 1, 0, 1, 5, false},
    {108, 0, 1, 0, 5, false},  {-72, 0, 1, 0, 7, false}, {-48, 0, 1, 0, 3, false}, {24, 1, 0, 1, 8, false},
    {12, 0, 0, 2, 3, false},   {12, 0, 1, 0, 9, false},
};
constexpr Monomial kK0h[] = {
    {24, 1, 0, 1, 4, true}, {6, 0, 1, 0, 9, true},  {-30, 1, 0, 1, 6, true},  {6, 1, 0, 1, 8, true},
    {54, 0, 1, 0, 5, true}, {-24, 0, 1, 0, 3, true}, {-36, 0, 1, 0, 7, true},
};
constexpr Monomial kK1phih[] = {
    {-48, 0, 0, 2, 0, false}, {6, 1, 0, 1, 4, false},  {-48, 1, 0, 1, 1, false}, {6, 0, 0, 2, 5, false},
    {-24, 1, 0, 1, 2, false}, {36, 1, 0, 1, 3, false}, {-6, 1, 0, 1, 5, false},  {84, 0, 0, 2, 2, false},
    {12, 0, 0, 2, 3, false},  {-18, 0, 0, 2, 4, false},
};
constexpr Monomial kK0phih[] = {
    {-24, 0, 0, 2, 1, true},
    {30, 0, 0, 2, 3, true},
    {-6, 0, 0, 2, 5, true},
};
constexpr Monomial kK1zero[] = {
    {72, 0, 1, 0, 7, false},   {48, 1, 0, 1, 1, false},  {24, 1, 0, 1, 2, false},  {-36, 1, 0, 1, 3, false},
    {-84, 0, 0, 2, 2, false},  {6, 1, 0, 1, 5, false},   {117, 1, 0, 1, 6, false}, {39, 0, 0, 2, 5, false},
    {-12, 0, 1, 0, 9, false},  {-138, 1, 0, 1, 4, false}, {48, 0, 0, 2, 0, false}, {-9, 0, 0, 2, 7, false},
    {48, 0, 1, 0, 3, false},   {18, 0, 0, 2, 4, false},  {-21, 1, 0, 1, 8, false}, {-12, 0, 0, 2, 3, false},
    {-108, 0, 1, 0, 5, false},
};
constexpr Monomial kConst[] = {
    {-24, 0, 0, 2, 1, true}, {-72, 1, 0, 1, 6, true}, {-36, 0, 0, 2, 5, true}, {54, 0, 0, 2, 3, true},
    {6, 0, 0, 2, 7, true},   {54, 0, 1, 0, 5, true},  {-36, 0, 1, 0, 7, true}, {-24, 0, 1, 0, 3, true},
    {-48, 1, 0, 1, 2, true}, {12, 1, 0, 1, 8, true},  {6, 0, 1, 0, 9, true},   {108, 1, 0, 1, 4, true},
};
constexpr Monomial kK1twoh[] = {
    {-12, 1, 0, 1, 4, false}, {-3, 1, 0, 1, 8, false}, {15, 1, 0, 1, 6, false},
    {-3, 0, 0, 2, 7, false},  {3, 0, 0, 2, 5, false},
};
constexpr Monomial kK1onephih[] = {
    {-24, 1, 0, 1, 3, false}, {-6, 1, 0, 1, 4, false}, {6, 1, 0, 1, 5, false}, {24, 1, 0, 1, 2, false},
    {18, 0, 0, 2, 4, false},  {-12, 0, 0, 2, 3, false}, {-6, 0, 0, 2, 5, false},
};

constexpr KernelBlock kBlocks[] = {
    {1, 1.0, 0.0, kK1h},   {0, 1.0, 0.0, kK0h},    {1, 0.0, 1.0, kK1phih},  {0, 0.0, 1.0, kK0phih},
    {1, 0.0, 0.0, kK1zero}, {0, 0.0, 0.0, kConst}, {1, 2.0, 0.0, kK1twoh}, {1, 1.0, 1.0, kK1onephih},
};

}  // namespace

std::span<const KernelBlock> blrprx_third_moment_blocks() { return kBlocks; }

}  // namespace detail

namespace {

double blrprx_third_moment_bracket(double alpha, double nu, double kappa, double phi, double f1, double f2, double h) {
  double total = 0.0;
  for (const auto& block : detail::blrprx_third_moment_blocks()) {
    double poly = 0.0;
    for (const auto& term : block.terms) {
      double v = term.coef * std::pow(f1, term.f1) * std::pow(f2, term.f2) * std::pow(kappa, term.kappa) *
                 std::pow(phi, term.phi);
      if (term.times_h) v *= h;
      poly += v;
    }
    const double s = (block.s_const + block.s_phi * phi) * h;
    total += poly * gamma_expectation(block.k, s, alpha, nu);
  }
  return total;
}

double blrprx_third_moment(double alpha, double nu, double kappa, double phi, double f1, double f2, double h) {
  // (1 + phi)^2 (phi - 1)^2 (phi - 2)(phi + 2) phi^3; the poles at phi = 1
  // and phi = 2 are removable, so bridge them by symmetric interpolation.
  const auto eval = [&](double ph) {
    const double denom = (1.0 + 2.0 * ph + ph * ph) *
                         (std::pow(ph, 4) - 2.0 * std::pow(ph, 3) - 3.0 * ph * ph + 8.0 * ph - 4.0) * std::pow(ph, 3);
    return blrprx_third_moment_bracket(alpha, nu, kappa, ph, f1, f2, h) / denom;
  };
  if (std::abs(phi - 2.0) < 0.5) return bridge_pole(eval, phi, 2.0);
  return bridge_pole(eval, phi, 1.0);
}

}  // namespace

AggregatedMoments blrprx_moments(const BlrprXParams& p, const IntensityLaw& law, double h, int max_lag) {
  require_positive(h, "h");
  require_non_negative(p.lambda, "lambda");
  require_non_negative(p.iota, "iota");
  require_positive(p.nu, "nu");
  require_positive(p.kappa, "kappa");
  require_positive(p.phi, "phi");
  require_alpha_above_one(p.alpha);

  const auto im = intensity_moments(law.with_mean(1.0));
  const double f1 = im.f1, f2 = im.f2;
  const double lambda = p.lambda, iota = p.iota, alpha = p.alpha, nu = p.nu;
  const double kappa = p.kappa, phi = p.phi;
  const auto K1 = [&](double s) { return gamma_expectation(1, s, alpha, nu); };

  const double mu_c = 1.0 + kappa / phi;

  AggregatedMoments out;
  out.h = h;
  out.mean = lambda * h * iota * mu_c;

  // kappa/(phi^2 (phi^2 - 1)) * (phi^3 A(h) - A(phi h) + (1 - phi^3) A(0)) for a
  // kernel combination A; removable pole at phi = 1.
  const auto storm_part = [&](auto&& combo) {
    const auto eval = [&](double ph) {
      const double ph3 = ph * ph * ph;
      return kappa / (ph * ph * (ph * ph - 1.0)) * (ph3 * combo(1.0) - combo(ph) + (1.0 - ph3) * combo(0.0));
    };
    return bridge_pole(eval, phi, 1.0);
  };

  const double var_bracket = f1 * (h - K1(0.0) + K1(h)) + kappa / phi * h +
                             storm_part([&](double c) { return K1(c * h); });
  out.variance = 2.0 * lambda * mu_c * iota * iota * var_bracket;

  for (int k = 1; k <= max_lag; ++k) {
    const auto d2 = [&](double c) {
      return K1(c * (k - 1) * h) - 2.0 * K1(c * k * h) + K1(c * (k + 1) * h);
    };
    // d2(0) vanishes, so the (1 - phi^3) A(0) term drops out.
    out.autocov.push_back(lambda * mu_c * iota * iota * (f1 * d2(1.0) + storm_part(d2)));
  }

  out.third_central = lambda * mu_c * iota * iota * iota * blrprx_third_moment(alpha, nu, kappa, phi, f1, f2, h);
  return out;
}

bool has_closed_form(Variant v) { return v == Variant::BLIPR || v == Variant::BLRPR_X; }

AggregatedMoments analytic_moments(const ModelParams& p, const IntensityLaw& law, PulseDepthDependence dep, double h,
                                   int max_lag) {
  if (const auto* q = std::get_if<BliprParams>(&p)) return blipr_moments(*q, law, dep, h, max_lag);
  if (const auto* q = std::get_if<BlrprXParams>(&p)) return blrprx_moments(*q, law, h, max_lag);
  throw Error(ErrorCode::InvalidArgument, std::string(to_string(variant_of(p))),
              std::string(to_string(variant_of(p))) + " has no closed-form moments; use simulation");
}

ScaleProperties to_scale_properties(const AggregatedMoments& m) {
  if (!(m.variance > 0.0)) throw Error(ErrorCode::ZeroVariance, "variance", "aggregated variance is not positive");
  if (m.autocov.empty()) throw Error(ErrorCode::InvalidArgument, "autocov", "lag-1 autocovariance required");
  return {std::sqrt(m.variance) / m.mean, m.third_central / std::pow(m.variance, 1.5), m.autocov[0] / m.variance};
}

namespace {
constexpr std::array<std::string_view, kPropertyCount> kPropertyNames{
    "mean_1h", "cv_5min", "ac1_5min", "skew_5min", "cv_1h",  "ac1_1h",  "skew_1h",
    "cv_6h",   "ac1_6h",  "skew_6h",  "cv_24h",    "ac1_24h", "skew_24h",
};
}  // namespace

std::span<const std::string_view> property_names() { return kPropertyNames; }

std::string_view timescale_label(double h) {
  if (std::abs(h - 1.0 / 12.0) < 1e-12) return "5min";
  if (h == 1.0) return "1h";
  if (h == 6.0) return "6h";
  if (h == 24.0) return "24h";
  return "custom";
}

std::array<double, kPropertyCount> FittingProperties::to_array() const {
  std::array<double, kPropertyCount> out{};
  out[0] = mean_1h;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    out[1 + 3 * i] = scales[i].cv;
    out[2 + 3 * i] = scales[i].lag1_ac;
    out[3 + 3 * i] = scales[i].skewness;
  }
  return out;
}

FittingProperties to_fitting_properties(std::span<const AggregatedMoments, kTimescales.size()> per_scale) {
  FittingProperties fp;
  for (std::size_t i = 0; i < kTimescales.size(); ++i) {
    fp.scales[i] = to_scale_properties(per_scale[i]);
    if (per_scale[i].h == 1.0) fp.mean_1h = per_scale[i].mean;
  }
  return fp;
}

FittingProperties model_fitting_properties(const ModelParams& p, const IntensityLaw& law, PulseDepthDependence dep) {
  std::array<AggregatedMoments, kTimescales.size()> per_scale;
  for (std::size_t i = 0; i < kTimescales.size(); ++i) per_scale[i] = analytic_moments(p, law, dep, kTimescales[i], 1);
  return to_fitting_properties(per_scale);
}

}  // namespace blrain
