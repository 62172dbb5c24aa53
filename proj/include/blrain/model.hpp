#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace blrain {

// Model variants of the Bartlett-Lewis family. Time unit is the hour, depths
// are in mm throughout.
enum class Variant { BLRP, BLRPR, BLRPR_X, BLIP, BLIPR };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

/// True for variants whose cell duration rate eta is drawn per storm.
constexpr bool is_random_eta(Variant v) {
  return v == Variant::BLRPR || v == Variant::BLRPR_X || v == Variant::BLIPR;
}

/// True for variants whose cells emit instantaneous pulses.
constexpr bool is_instantaneous(Variant v) {
  return v == Variant::BLIP || v == Variant::BLIPR;
}

struct BlrpParams {
  double lambda;  // storm arrival rate, 1/h
  double mu_x;    // mean cell intensity, mm/h
  double beta;    // cell arrival rate, 1/h
  double gamma;   // cell-process termination rate, 1/h
  double eta;     // cell duration rate, 1/h
};

struct BlrprParams {
  double lambda;
  double mu_x;
  double alpha;  // gamma shape of eta
  double nu;     // gamma rate of eta, h
  double kappa;  // beta / eta
  double phi;    // gamma / eta
};

/// Random-eta rectangular model with mean cell intensity iota * eta.
struct BlrprXParams {
  double lambda;
  double iota;  // mu_x / eta, mm
  double alpha;
  double nu;
  double kappa;
  double phi;
};

struct BlipParams {
  double lambda;
  double mu_x;  // mean pulse depth, mm
  double beta;
  double gamma;
  double eta;
  double xi;  // pulse rate, 1/h
};

struct BliprParams {
  double lambda;
  double mu_x;  // mean pulse depth, mm
  double alpha;
  double nu;
  double kappa;
  double phi;
  double omega;  // xi / eta
};

using ModelParams =
    std::variant<BlrpParams, BlrprParams, BlrprXParams, BlipParams, BliprParams>;

Variant variant_of(const ModelParams& p);

/// Field names in declaration order; this order is used for parameter vectors,
/// serialization and fitting.
std::span<const std::string_view> field_names(Variant v);
std::string_view field_unit(Variant v, std::string_view field);
std::vector<double> field_values(const ModelParams& p);
ModelParams make_params(Variant v, std::span<const double> values);
/// Index of `field` in field_names(v), or nullopt.
std::optional<std::size_t> field_index(Variant v, std::string_view field);

struct ConstraintSet {
  double alpha_min = 1.0;
  /// Admit lambda = 0 and a zero depth scale (mu_x / iota). Used for
  /// degenerate simulation runs; fitting never sets it.
  bool allow_degenerate = false;
};

/// Guard above alpha_min: a random-eta parameter set needs
/// alpha > alpha_min + kAlphaGuard.
inline constexpr double kAlphaGuard = 1e-6;

class ValidatedParams {
 public:
  const ModelParams& params() const noexcept { return params_; }
  Variant variant() const noexcept { return variant_of(params_); }
  template <class T>
  const T& as() const {
    return std::get<T>(params_);
  }

 private:
  explicit ValidatedParams(ModelParams p) : params_(std::move(p)) {}
  friend ValidatedParams validate_params(const ModelParams&, const ConstraintSet&);
  ModelParams params_;
};

/// Throws Error{NonPositiveParameter | AlphaBelowMinimum} naming the field.
ValidatedParams validate_params(const ModelParams& p, const ConstraintSet& constraints = {});

struct DerivedProps {
  double msit_h;   // mean storm inter-arrival time
  double msd_h;    // mean duration of storm activity
  double mcit_min; // mean cell inter-arrival time
  double mcd_min;  // mean cell duration
  double mcs;      // mean number of cells per storm
  std::optional<double> mpc;  // mean pulses per cell, instantaneous variants
};

DerivedProps derived_properties(const ValidatedParams& p);

enum class IntensityFamily { Exponential, Gamma, Weibull };

std::string_view to_string(IntensityFamily f);
IntensityFamily parse_intensity_family(std::string_view name);

/// Distribution of a cell intensity or pulse depth, parameterized by its mean
/// and a fixed shape. The exponential law has no shape.
struct IntensityLaw {
  IntensityFamily family = IntensityFamily::Exponential;
  double mean = 1.0;
  double shape = 1.0;

  static IntensityLaw exponential(double mean) { return {IntensityFamily::Exponential, mean, 1.0}; }
  static IntensityLaw gamma(double mean, double shape) { return {IntensityFamily::Gamma, mean, shape}; }
  static IntensityLaw weibull(double mean, double shape) { return {IntensityFamily::Weibull, mean, shape}; }

  IntensityLaw with_mean(double m) const { return {family, m, shape}; }
};

struct IntensityMoments {
  double m1;  // E(X)
  double m2;  // E(X^2)
  double m3;  // E(X^3)
  double f1;  // E(X^2) / E(X)^2
  double f2;  // E(X^3) / E(X)^3
};

/// Closed-form raw moments. Throws UnsupportedShape for shape <= 0 on the
/// gamma and Weibull families.
IntensityMoments intensity_moments(const IntensityLaw& law);

enum class PulseDepthDependence { Independent, Common };

std::string_view to_string(PulseDepthDependence d);
PulseDepthDependence parse_dependence(std::string_view name);

/// Product moments of depths of distinct pulses within one cell.
struct PulseProductMoments {
  double pair;         // E(X_k X_l)
  double triple;       // E(X_k X_l X_m)
  double square_pair;  // E(X_k^2 X_l)
};

PulseProductMoments pulse_product_moments(PulseDepthDependence dep, const IntensityMoments& m);

/// One parameter document: a parameter set for one calendar month (0 when the
/// set is not tied to a month).
struct ParamDocument {
  ModelParams params;
  int month = 0;
};

nlohmann::json to_json(const ParamDocument& doc);
ParamDocument param_document_from_json(const nlohmann::json& j);

}  // namespace blrain
