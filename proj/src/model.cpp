#include "blrain/model.hpp"

#include <cmath>
#include <string>

#include "blrain/error.hpp"

namespace blrain {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::AlphaBelowMinimum: return "AlphaBelowMinimum";
    case ErrorCode::UnsupportedShape: return "UnsupportedShape";
    case ErrorCode::AlphaTooSmall: return "AlphaTooSmall";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::HorizonNonPositive: return "HorizonNonPositive";
    case ErrorCode::NonDividingBin: return "NonDividingBin";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotoneTimestamps: return "NonMonotoneTimestamps";
    case ErrorCode::NegativeDepth: return "NegativeDepth";
    case ErrorCode::InsufficientYears: return "InsufficientYears";
    case ErrorCode::AllDryMonth: return "AllDryMonth";
    case ErrorCode::NoWetIntervals: return "NoWetIntervals";
    case ErrorCode::NoCompleteYears: return "NoCompleteYears";
    case ErrorCode::NoFeasibleStart: return "NoFeasibleStart";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ThresholdNotBracketed: return "ThresholdNotBracketed";
    case ErrorCode::SingularCurvature: return "SingularCurvature";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::BLRP: return "BLRP";
    case Variant::BLRPR: return "BLRPR";
    case Variant::BLRPR_X: return "BLRPR_X";
    case Variant::BLIP: return "BLIP";
    case Variant::BLIPR: return "BLIPR";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::BLRP, Variant::BLRPR, Variant::BLRPR_X, Variant::BLIP, Variant::BLIPR}) {
    if (name == to_string(v)) return v;
  }
  throw Error(ErrorCode::InvalidArgument, std::string(name), "unknown model variant '" + std::string(name) + "'");
}

namespace {

constexpr std::array<std::string_view, 5> kBlrpFields{"lambda", "mu_x", "beta", "gamma", "eta"};
constexpr std::array<std::string_view, 6> kBlrprFields{"lambda", "mu_x", "alpha", "nu", "kappa", "phi"};
constexpr std::array<std::string_view, 6> kBlrprXFields{"lambda", "iota", "alpha", "nu", "kappa", "phi"};
constexpr std::array<std::string_view, 6> kBlipFields{"lambda", "mu_x", "beta", "gamma", "eta", "xi"};
constexpr std::array<std::string_view, 7> kBliprFields{"lambda", "mu_x", "alpha", "nu", "kappa", "phi", "omega"};

void require_size(Variant v, std::span<const double> values) {
  if (values.size() != field_names(v).size()) {
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(v)),
                "expected " + std::to_string(field_names(v).size()) + " parameter values, got " +
                    std::to_string(values.size()));
  }
}

}  // namespace

Variant variant_of(const ModelParams& p) {
  return static_cast<Variant>(p.index());
}

std::span<const std::string_view> field_names(Variant v) {
  switch (v) {
    case Variant::BLRP: return kBlrpFields;
    case Variant::BLRPR: return kBlrprFields;
    case Variant::BLRPR_X: return kBlrprXFields;
    case Variant::BLIP: return kBlipFields;
    case Variant::BLIPR: return kBliprFields;
  }
  return {};
}

std::string_view field_unit(Variant v, std::string_view field) {
  if (field == "lambda" || field == "beta" || field == "gamma" || field == "eta" || field == "xi") return "1/h";
  if (field == "nu") return "h";
  if (field == "iota") return "mm";
  if (field == "mu_x") return is_instantaneous(v) ? "mm" : "mm/h";
  return "1";
}

std::optional<std::size_t> field_index(Variant v, std::string_view field) {
  auto names = field_names(v);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == field) return i;
  }
  return std::nullopt;
}

std::vector<double> field_values(const ModelParams& p) {
  return std::visit(
      [](const auto& q) -> std::vector<double> {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, BlrpParams>) {
          return {q.lambda, q.mu_x, q.beta, q.gamma, q.eta};
        } else if constexpr (std::is_same_v<T, BlrprParams>) {
          return {q.lambda, q.mu_x, q.alpha, q.nu, q.kappa, q.phi};
        } else if constexpr (std::is_same_v<T, BlrprXParams>) {
          return {q.lambda, q.iota, q.alpha, q.nu, q.kappa, q.phi};
        } else if constexpr (std::is_same_v<T, BlipParams>) {
          return {q.lambda, q.mu_x, q.beta, q.gamma, q.eta, q.xi};
        } else {
          return {q.lambda, q.mu_x, q.alpha, q.nu, q.kappa, q.phi, q.omega};
        }
      },
      p);
}

ModelParams make_params(Variant v, std::span<const double> x) {
  require_size(v, x);
  switch (v) {
    case Variant::BLRP: return BlrpParams{x[0], x[1], x[2], x[3], x[4]};
    case Variant::BLRPR: return BlrprParams{x[0], x[1], x[2], x[3], x[4], x[5]};
    case Variant::BLRPR_X: return BlrprXParams{x[0], x[1], x[2], x[3], x[4], x[5]};
    case Variant::BLIP: return BlipParams{x[0], x[1], x[2], x[3], x[4], x[5]};
    case Variant::BLIPR: return BliprParams{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
  }
  throw Error(ErrorCode::InvalidArgument, "variant", "bad variant");
}

ValidatedParams validate_params(const ModelParams& p, const ConstraintSet& constraints) {
  const Variant v = variant_of(p);
  const auto names = field_names(v);
  const auto values = field_values(p);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const bool may_be_zero =
        constraints.allow_degenerate && (names[i] == "lambda" || names[i] == "mu_x" || names[i] == "iota");
    const double x = values[i];
    if (!std::isfinite(x) || x < 0.0 || (x == 0.0 && !may_be_zero)) {
      throw Error(ErrorCode::NonPositiveParameter, std::string(names[i]),
                  std::string(names[i]) + " must be strictly positive (got " + std::to_string(x) + ")");
    }
  }
  if (is_random_eta(v)) {
    const double alpha = values[*field_index(v, "alpha")];
    if (!(alpha > constraints.alpha_min + kAlphaGuard)) {
      throw Error(ErrorCode::AlphaBelowMinimum, "alpha",
                  "alpha = " + std::to_string(alpha) + " must exceed " + std::to_string(constraints.alpha_min));
    }
  }
  return ValidatedParams(p);
}

DerivedProps derived_properties(const ValidatedParams& vp) {
  return std::visit(
      [](const auto& q) -> DerivedProps {
        using T = std::decay_t<decltype(q)>;
        DerivedProps d{};
        d.msit_h = 1.0 / q.lambda;
        if constexpr (std::is_same_v<T, BlrpParams> || std::is_same_v<T, BlipParams>) {
          d.msd_h = 1.0 / q.gamma;
          d.mcit_min = 60.0 / q.beta;
          d.mcd_min = 60.0 / q.eta;
          if constexpr (std::is_same_v<T, BlrpParams>) {
            d.mcs = 1.0 + q.beta / q.gamma;
          } else {
            // No cell at the storm origin; pulses stop at the sooner of cell
            // and storm termination.
            d.mcs = q.beta / q.gamma;
            d.mpc = q.xi / (q.eta + q.gamma);
          }
        } else {
          // E[1/eta] for eta ~ Gamma(alpha, rate nu).
          const double inv_eta = q.nu / (q.alpha - 1.0);
          d.msd_h = inv_eta / q.phi;
          d.mcit_min = 60.0 * inv_eta / q.kappa;
          d.mcd_min = 60.0 * inv_eta;
          if constexpr (std::is_same_v<T, BliprParams>) {
            d.mcs = q.kappa / q.phi;
            const double pulses_per_storm = q.kappa * q.omega / (q.phi * (q.phi + 1.0));
            d.mpc = pulses_per_storm / d.mcs;
          } else {
            d.mcs = 1.0 + q.kappa / q.phi;
          }
        }
        return d;
      },
      vp.params());
}

std::string_view to_string(IntensityFamily f) {
  switch (f) {
    case IntensityFamily::Exponential: return "exponential";
    case IntensityFamily::Gamma: return "gamma";
    case IntensityFamily::Weibull: return "weibull";
  }
  return "?";
}

IntensityFamily parse_intensity_family(std::string_view name) {
  for (auto f : {IntensityFamily::Exponential, IntensityFamily::Gamma, IntensityFamily::Weibull}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorCode::InvalidArgument, std::string(name), "unknown intensity family '" + std::string(name) + "'");
}

IntensityMoments intensity_moments(const IntensityLaw& law) {
  const double mu = law.mean;
  double f1 = 2.0;
  double f2 = 6.0;
  switch (law.family) {
    case IntensityFamily::Exponential:
      break;
    case IntensityFamily::Gamma: {
      if (!(law.shape > 0.0)) throw Error(ErrorCode::UnsupportedShape, "shape", "gamma shape must be positive");
      const double k = law.shape;
      f1 = 1.0 + 1.0 / k;
      f2 = f1 * (1.0 + 2.0 / k);
      break;
    }
    case IntensityFamily::Weibull: {
      if (!(law.shape > 0.0)) throw Error(ErrorCode::UnsupportedShape, "shape", "Weibull shape must be positive");
      // E(X^r) / E(X)^r = Gamma(1 + r/c) / Gamma(1 + 1/c)^r, in log space.
      const double c = law.shape;
      const double lg1 = std::lgamma(1.0 + 1.0 / c);
      f1 = std::exp(std::lgamma(1.0 + 2.0 / c) - 2.0 * lg1);
      f2 = std::exp(std::lgamma(1.0 + 3.0 / c) - 3.0 * lg1);
      break;
    }
  }
  return {mu, f1 * mu * mu, f2 * mu * mu * mu, f1, f2};
}

std::string_view to_string(PulseDepthDependence d) {
  return d == PulseDepthDependence::Independent ? "independent" : "common";
}

PulseDepthDependence parse_dependence(std::string_view name) {
  if (name == "independent") return PulseDepthDependence::Independent;
  if (name == "common") return PulseDepthDependence::Common;
  throw Error(ErrorCode::InvalidArgument, std::string(name), "unknown pulse-depth mode '" + std::string(name) + "'");
}

PulseProductMoments pulse_product_moments(PulseDepthDependence dep, const IntensityMoments& m) {
  if (dep == PulseDepthDependence::Common) return {m.m2, m.m3, m.m3};
  return {m.m1 * m.m1, m.m1 * m.m1 * m.m1, m.m2 * m.m1};
}

nlohmann::json to_json(const ParamDocument& doc) {
  const Variant v = variant_of(doc.params);
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json units = nlohmann::json::object();
  const auto names = field_names(v);
  const auto values = field_values(doc.params);
  for (std::size_t i = 0; i < names.size(); ++i) {
    params[std::string(names[i])] = values[i];
    units[std::string(names[i])] = std::string(field_unit(v, names[i]));
  }
  return {{"variant", std::string(to_string(v))}, {"month", doc.month}, {"units", units}, {"params", params}};
}

ParamDocument param_document_from_json(const nlohmann::json& j) {
  try {
    const Variant v = parse_variant(j.at("variant").get<std::string>());
    const auto& params = j.at("params");
    const auto& units = j.at("units");
    std::vector<double> values;
    for (auto name : field_names(v)) {
      const std::string key(name);
      if (units.at(key).get<std::string>() != field_unit(v, name)) {
        throw Error(ErrorCode::ParseError, key,
                    "unit of " + key + " must be '" + std::string(field_unit(v, name)) + "'");
      }
      values.push_back(params.at(key).get<double>());
    }
    return {make_params(v, values), j.value("month", 0)};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "params", std::string("malformed parameter document: ") + e.what());
  }
}

}  // namespace blrain
