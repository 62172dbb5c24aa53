#include "blrain/fitter.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "blrain/error.hpp"
#include "blrain/moments.hpp"
#include "blrain/optimize.hpp"
#include "blrain/parallel.hpp"

namespace blrain {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<std::size_t> alpha_field(Variant v) {
  if (!is_random_eta(v)) return std::nullopt;
  return field_index(v, "alpha");
}

}  // namespace

void check_spec(const ObjectiveSpec& spec) {
  if (!has_closed_form(spec.variant)) {
    throw Error(ErrorCode::InvalidArgument, "variant",
                "fitting needs closed-form moments; " + std::string(to_string(spec.variant)) + " has none");
  }
  const auto& t = spec.target;
  if (t.values.size() != kPropertyCount || t.weights.size() != kPropertyCount) {
    throw Error(ErrorCode::InvalidArgument, "target",
                "statistic vector must hold " + std::to_string(kPropertyCount) + " values and weights");
  }
  for (std::size_t i = 0; i < kPropertyCount; ++i) {
    if (!(t.weights[i] > 0.0) || !std::isfinite(t.weights[i]) || !std::isfinite(t.values[i])) {
      throw Error(ErrorCode::InvalidArgument, std::string(property_names()[i]),
                  "weights must be positive and statistics finite");
    }
  }
  for (const auto& [name, value] : spec.fixed) {
    if (!field_index(spec.variant, name)) {
      throw Error(ErrorCode::InvalidArgument, name, "'" + name + "' is not a parameter of " +
                                                        std::string(to_string(spec.variant)));
    }
    if (!(value > 0.0)) throw Error(ErrorCode::NonPositiveParameter, name, "fixed " + name + " must be positive");
  }
  const std::size_t n_free = field_names(spec.variant).size() - spec.fixed.size();
  if (n_free >= kPropertyCount) {
    throw Error(ErrorCode::InvalidArgument, "fixed", "more free parameters than fitting properties");
  }
}

double objective(std::span<const double> target, std::span<const double> weights, std::span<const double> tau) {
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target[i] - tau[i];
    s += weights[i] * d * d;
  }
  return s;
}

double objective(const ModelParams& theta, const ObjectiveSpec& spec, bool* penalized) {
  if (penalized) *penalized = false;
  try {
    const auto vp = validate_params(theta, spec.constraints);
    const auto tau = model_fitting_properties(vp.params(), spec.law, spec.dep).to_array();
    const double s = objective(spec.target.values, spec.target.weights, tau);
    if (std::isfinite(s)) return s;
  } catch (const Error&) {
  }
  if (penalized) *penalized = true;
  return kInf;
}

ParameterTransform::ParameterTransform(const ObjectiveSpec& spec)
    : variant_(spec.variant), alpha_min_(spec.constraints.alpha_min), alpha_index_(alpha_field(spec.variant)) {
  const auto names = field_names(variant_);
  fixed_values_.assign(names.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& [name, value] : spec.fixed) {
    const auto i = field_index(variant_, name);
    if (!i) throw Error(ErrorCode::InvalidArgument, name, "'" + name + "' is not a parameter");
    fixed_values_[*i] = value;
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (std::isnan(fixed_values_[i])) free_.push_back(i);
  }
}

std::string_view ParameterTransform::free_name(std::size_t i) const { return field_names(variant_)[free_[i]]; }

ModelParams ParameterTransform::apply_fixed(const ModelParams& p) const {
  auto values = field_values(p);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isnan(fixed_values_[i])) values[i] = fixed_values_[i];
  }
  return make_params(variant_, values);
}

std::vector<double> ParameterTransform::to_free(const ModelParams& p) const {
  const auto values = field_values(apply_fixed(p));
  std::vector<double> z;
  z.reserve(free_.size());
  for (std::size_t i : free_) {
    const double x = (alpha_index_ && i == *alpha_index_) ? values[i] - alpha_min_ : values[i];
    z.push_back(x > 0.0 ? std::log(x) : -kInf);
  }
  return z;
}

ModelParams ParameterTransform::from_free(std::span<const double> z) const {
  std::vector<double> values = fixed_values_;
  for (std::size_t k = 0; k < free_.size(); ++k) {
    const std::size_t i = free_[k];
    values[i] = std::exp(z[k]);
    if (alpha_index_ && i == *alpha_index_) values[i] += alpha_min_;
  }
  return make_params(variant_, values);
}

std::string_view to_string(FitStatus s) { return s == FitStatus::Converged ? "converged" : "non_convergence"; }

void ConfidenceInterval::require_bracketed() const {
  if (!bracketed()) {
    throw Error(ErrorCode::ThresholdNotBracketed, name,
                "profile of " + name + " does not cross the threshold on the " +
                    (lower_bracketed ? "upper" : "lower") + " side");
  }
}

double ParamCovariance::standard_error(std::size_t i) const { return std::sqrt(std::max(0.0, at(i, i))); }

// ---------------------------------------------------------------------------
// fit

namespace {

struct RunResult {
  std::vector<double> z;
  double value = kInf;
  bool converged = false;
  long evaluations = 0;
  long penalties = 0;
};

class CountingObjective {
 public:
  CountingObjective(const ObjectiveSpec& spec, const ParameterTransform& tr) : spec_(spec), tr_(tr) {}

  double operator()(const std::vector<double>& z) {
    ++evaluations;
    for (double v : z) {
      if (!std::isfinite(v) || std::abs(v) > 700.0) {
        ++penalties;
        return kInf;
      }
    }
    bool pen = false;
    const double s = objective(tr_.from_free(z), spec_, &pen);
    if (pen) ++penalties;
    return s;
  }

  long evaluations = 0;
  long penalties = 0;

 private:
  const ObjectiveSpec& spec_;
  const ParameterTransform& tr_;
};

opt::Options optimizer_options(const FitOptions& o) {
  opt::Options oo;
  oo.rel_tol = o.rel_tol;
  oo.max_iter = o.max_iter;
  return oo;
}

// Nelder-Mead, restarted from its own result until a restart no longer
// improves (at most three restarts).
RunResult simplex_run(const ObjectiveSpec& spec, const ParameterTransform& tr, std::vector<double> z0,
                      const FitOptions& o) {
  CountingObjective f(spec, tr);
  opt::Objective fn = [&](const std::vector<double>& z) { return f(z); };
  auto oo = optimizer_options(o);
  auto r = opt::nelder_mead(fn, std::move(z0), oo);
  for (int restart = 0; restart < 3 && std::isfinite(r.value); ++restart) {
    oo.initial_step = 0.05;
    auto again = opt::nelder_mead(fn, r.x, oo);
    const bool improved = again.value < r.value - o.rel_tol * std::abs(r.value) - 1e-300;
    if (again.value <= r.value) {
      again.converged = again.converged && r.converged;
      r = std::move(again);
    }
    if (!improved) break;
  }
  return {r.x, r.value, r.converged, f.evaluations, f.penalties};
}

RunResult newton_run(const ObjectiveSpec& spec, const ParameterTransform& tr, const std::vector<double>& z0,
                     const FitOptions& o) {
  CountingObjective f(spec, tr);
  opt::Objective fn = [&](const std::vector<double>& z) { return f(z); };
  auto r = opt::bfgs(fn, z0, optimizer_options(o));
  return {r.x, r.value, r.converged, f.evaluations, f.penalties};
}

// Draws a feasible perturbed start; start 0 is the user start itself.
std::vector<double> perturbed_start(const ObjectiveSpec& spec, const ParameterTransform& tr,
                                    const std::vector<double>& z0, const FitOptions& o, std::size_t index) {
  if (index == 0) return z0;
  std::seed_seq seq{static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5157u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> n01;
  std::vector<double> z = z0;
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = z0[i] + o.perturb_sigma * n01(rng);
    if (std::isfinite(objective(tr.from_free(z), spec))) return z;
  }
  return z0;
}

}  // namespace

FitResult fit(const ObjectiveSpec& spec, const ModelParams& start, const FitOptions& opts) {
  check_spec(spec);
  if (variant_of(start) != spec.variant) {
    throw Error(ErrorCode::InvalidArgument, "start", "start parameters are not of the fitted variant");
  }
  if (opts.n_starts < 1 || opts.n_refine < 0) {
    throw Error(ErrorCode::InvalidArgument, "opts", "need at least one start");
  }
  const ParameterTransform tr(spec);
  ModelParams s0 = tr.apply_fixed(start);
  if (!std::isfinite(objective(s0, spec))) {
    std::string why;
    try {
      validate_params(s0, spec.constraints);
      why = "moments undefined at the start";
    } catch (const Error& e) {
      const auto ai = alpha_field(spec.variant);
      if (e.code() == ErrorCode::AlphaBelowMinimum && opts.project_start && ai) {
        auto values = field_values(s0);
        values[*ai] = spec.constraints.alpha_min + 0.1;
        s0 = make_params(spec.variant, values);
      }
      why = e.what();
    }
    if (!std::isfinite(objective(s0, spec))) {
      throw Error(ErrorCode::NoFeasibleStart, "start", "infeasible start: " + why);
    }
  }
  const auto z0 = tr.to_free(s0);

  FitResult out;
  out.month = spec.target.month;
  out.alpha_min = spec.constraints.alpha_min;
  out.fixed = spec.fixed;

  const auto n1 = static_cast<std::size_t>(opts.n_starts);
  std::vector<RunResult> stage1(n1);
  parallel_for(n1, opts.threads, [&](std::size_t i) {
    stage1[i] = simplex_run(spec, tr, perturbed_start(spec, tr, z0, opts, i), opts);
  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < n1; ++i) {
    out.stage1.push_back(stage1[i].value);
    out.evaluations += stage1[i].evaluations;
    out.penalties += stage1[i].penalties;
    if (stage1[i].value < stage1[best].value) best = i;
  }
  RunResult current = stage1[best];
  if (!std::isfinite(current.value)) {
    throw Error(ErrorCode::NoFeasibleStart, "start", "no start reached a finite objective");
  }
  bool converged = current.converged;
  for (int k = 0; k < opts.n_refine; ++k) {
    auto r = newton_run(spec, tr, current.z, opts);
    out.evaluations += r.evaluations;
    out.penalties += r.penalties;
    const double gain = current.value - r.value;
    if (r.value <= current.value) {
      converged = r.converged || converged;
      current.z = r.z;
      current.value = r.value;
    }
    out.stage2.push_back(current.value);
    if (!(gain > opts.rel_tol * std::abs(current.value))) break;
  }
  out.theta = tr.from_free(current.z);
  out.objective = current.value;
  out.status = converged ? FitStatus::Converged : FitStatus::NonConvergence;
  return out;
}

// ---------------------------------------------------------------------------
// profiles and intervals

ProfileCurve profile(const ObjectiveSpec& spec, const FitResult& fr, std::size_t index, std::span<const double> grid,
                     const FitOptions& opts) {
  const auto names = field_names(spec.variant);
  if (index >= names.size()) throw Error(ErrorCode::InvalidArgument, "index", "parameter index out of range");
  const std::string name(names[index]);
  if (spec.fixed.count(name)) throw Error(ErrorCode::InvalidArgument, name, name + " is fixed; nothing to profile");

  ProfileCurve curve;
  curve.name = name;
  curve.index = index;
  curve.estimate = field_values(fr.theta)[index];
  curve.fit_objective = fr.objective;
  std::vector<double> values(grid.begin(), grid.end());
  std::sort(values.begin(), values.end());
  curve.points.resize(values.size());

  FitOptions inner = opts;
  inner.n_starts = 1;
  inner.threads = 1;
  parallel_for(values.size(), opts.threads, [&](std::size_t g) {
    ProfilePoint& pt = curve.points[g];
    pt.value = values[g];
    ObjectiveSpec sub = spec;
    sub.fixed[name] = values[g];
    try {
      auto r = fit(sub, fr.theta, inner);
      pt.objective = r.objective;
      pt.ok = true;
      if (r.status != FitStatus::Converged) pt.message = "non_convergence";
    } catch (const Error& e) {
      pt.objective = kInf;
      pt.ok = false;
      pt.message = e.what();
    }
  });
  return curve;
}

std::vector<double> profile_grid(double estimate, double log_half_width, int half_points) {
  std::vector<double> g;
  for (int i = -half_points; i <= half_points; ++i) {
    g.push_back(i == 0 ? estimate : estimate * std::exp(log_half_width * i / half_points));
  }
  return g;
}

double profile_scale(const ParamCovariance& cov, std::string_view name) {
  const std::size_t p = cov.size();
  for (std::size_t i = 0; i < p; ++i) {
    if (cov.names[i] != name) continue;
    const double naive = cov.naive.size() == p * p ? cov.naive[i * p + i] : 0.0;
    const double sandwich = cov.at(i, i);
    if (!(naive > 0.0) || !(sandwich > 0.0)) {
      throw Error(ErrorCode::SingularCurvature, std::string(name), "covariance of " + std::string(name) + " is not positive");
    }
    return naive / (2.0 * sandwich);
  }
  throw Error(ErrorCode::InvalidArgument, std::string(name), "no covariance entry for " + std::string(name));
}

ProfileCurve scale_profile(const ProfileCurve& curve, double c) {
  ProfileCurve out = curve;
  out.scale = curve.scale * c;
  for (auto& p : out.points) {
    if (p.ok) p.objective = curve.fit_objective + c * (p.objective - curve.fit_objective);
  }
  return out;
}

ConfidenceInterval confidence_interval(const ProfileCurve& curve, double threshold_offset) {
  ConfidenceInterval ci;
  ci.name = curve.name;
  ci.estimate = curve.estimate;
  const auto& pts = curve.points;
  if (pts.empty()) {
    ci.lo = ci.hi = curve.estimate;
    return ci;
  }
  double floor = curve.fit_objective;
  for (const auto& p : pts) {
    if (p.ok) floor = std::min(floor, p.objective);
  }
  const double thr = floor + threshold_offset;

  std::size_t c = 0;
  double dist = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::abs(std::log(pts[i].value / curve.estimate));
    if (pts[i].ok && d < dist) {
      dist = d;
      c = i;
    }
  }
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double a = std::log(pts[inside].value), b = std::log(pts[outside].value);
    const double sa = pts[inside].objective, sb = pts[outside].objective;
    return std::exp(a + (thr - sa) / (sb - sa) * (b - a));
  };
  std::size_t i = c;
  while (i > 0 && pts[i - 1].ok && pts[i - 1].objective <= thr) --i;
  if (i > 0 && pts[i - 1].ok && pts[i].objective <= thr) {
    ci.lo = crossing(i, i - 1);
    ci.lower_bracketed = true;
  } else {
    ci.lo = pts[i].value;
  }
  std::size_t j = c;
  while (j + 1 < pts.size() && pts[j + 1].ok && pts[j + 1].objective <= thr) ++j;
  if (j + 1 < pts.size() && pts[j + 1].ok && pts[j].objective <= thr) {
    ci.hi = crossing(j, j + 1);
    ci.upper_bracketed = true;
  } else {
    ci.hi = pts[j].value;
  }
  ci.lo = std::min(ci.lo, curve.estimate);
  ci.hi = std::max(ci.hi, curve.estimate);
  return ci;
}

ProfileCurve auto_profile(const ObjectiveSpec& spec, const FitResult& fr, std::size_t index, const FitOptions& opts,
                          double log_half_width, int half_points, double max_log_half_width,
                          double threshold_offset) {
  const double estimate = field_values(fr.theta)[index];
  auto curve = profile(spec, fr, index, profile_grid(estimate, log_half_width, half_points), opts);
  const double step = log_half_width / half_points;
  // widen each open side in blocks of half_points grid steps
  for (double width = log_half_width; width < max_log_half_width - 1e-12;) {
    const auto ci = confidence_interval(curve, threshold_offset);
    const bool low_open = !ci.lower_bracketed && curve.points.front().ok;
    const bool high_open = !ci.upper_bracketed && curve.points.back().ok;
    if (!low_open && !high_open) break;
    const double next = std::min(max_log_half_width, width + log_half_width);
    std::vector<double> extra;
    for (double w = width + step; w <= next + 1e-12; w += step) {
      if (low_open) extra.push_back(estimate * std::exp(-w));
      if (high_open) extra.push_back(estimate * std::exp(w));
    }
    width = next;
    const auto more = profile(spec, fr, index, extra, opts);
    curve.points.insert(curve.points.end(), more.points.begin(), more.points.end());
    std::sort(curve.points.begin(), curve.points.end(),
              [](const ProfilePoint& a, const ProfilePoint& b) { return a.value < b.value; });
  }
  return curve;
}

void write_profile_csv(std::ostream& out, const ProfileCurve& curve) {
  out << "param,value,objective\n";
  char buf[128];
  for (const auto& p : curve.points) {
    if (p.ok) {
      std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g\n", curve.name.c_str(), p.value, p.objective);
    } else {
      std::snprintf(buf, sizeof buf, "%s,%.10g,\n", curve.name.c_str(), p.value);
    }
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// covariance and sampling

ParamCovariance parameter_covariance(const ObjectiveSpec& spec, const FitResult& fr, double step) {
  check_spec(spec);
  const ParameterTransform tr(spec);
  const auto free = tr.free_indices();
  const std::size_t p = free.size();
  const std::size_t k = kPropertyCount;
  const auto base = field_values(fr.theta);

  auto tau_at = [&](std::size_t which, double shift) {
    auto v = base;
    v[free[which]] *= std::exp(shift);
    const auto vp = validate_params(make_params(spec.variant, v), spec.constraints);
    return model_fitting_properties(vp.params(), spec.law, spec.dep).to_array();
  };
  Eigen::MatrixXd J(k, p);
  try {
    for (std::size_t j = 0; j < p; ++j) {
      const auto up = tau_at(j, step);
      const auto down = tau_at(j, -step);
      for (std::size_t i = 0; i < k; ++i) J(i, j) = (up[i] - down[i]) / (2.0 * step);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::SingularCurvature, "theta", std::string("Jacobian undefined at the estimate: ") + e.what());
  }

  Eigen::MatrixXd W = Eigen::VectorXd::Map(spec.target.weights.data(), k).asDiagonal();
  Eigen::MatrixXd V(k, k);
  if (spec.target.covariance.size() == k * k) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) V(i, j) = spec.target.covariance[i * k + j];
    }
  } else if (spec.target.variances.size() == k) {
    V = Eigen::VectorXd::Map(spec.target.variances.data(), k).asDiagonal();
  } else {
    V = W.inverse();
  }
  const Eigen::MatrixXd A = J.transpose() * W * J;
  const Eigen::MatrixXd B = J.transpose() * W * V * W * J;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
  const auto& ev = eig.eigenvalues();
  if (eig.info() != Eigen::Success || !(ev.minCoeff() > 1e-12 * std::abs(ev.maxCoeff()))) {
    throw Error(ErrorCode::SingularCurvature, "theta", "curvature matrix is singular at the estimate");
  }
  const Eigen::MatrixXd Ainv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  Eigen::MatrixXd C = Ainv * B * Ainv;
  C = 0.5 * (C + C.transpose());

  ParamCovariance out;
  for (std::size_t j = 0; j < p; ++j) {
    out.names.emplace_back(tr.free_name(j));
    out.center.push_back(std::log(base[free[j]]));
  }
  out.matrix.resize(p * p);
  out.naive.resize(p * p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      out.matrix[i * p + j] = C(i, j);
      out.naive[i * p + j] = 0.5 * (Ainv(i, j) + Ainv(j, i));
    }
  }
  return out;
}

ParameterSampler::ParameterSampler(const FitResult& fr, const ParamCovariance& cov)
    : base_(fr.theta), alpha_min_(fr.alpha_min), center_(cov.center) {
  const Variant v = variant_of(base_);
  const std::size_t p = cov.size();
  for (const auto& name : cov.names) {
    const auto i = field_index(v, name);
    if (!i) throw Error(ErrorCode::InvalidArgument, name, "covariance names an unknown parameter");
    indices_.push_back(*i);
  }
  Eigen::MatrixXd C(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) C(i, j) = cov.at(i, j);
  }
  // square root via the eigen decomposition tolerates semidefinite input
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd L = eig.eigenvectors() * root.asDiagonal();
  chol_.resize(p * p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) chol_[i * p + j] = L(i, j);
  }
}

std::vector<double> ParameterSampler::draw_log(std::mt19937_64& rng) const {
  const std::size_t p = center_.size();
  std::normal_distribution<double> n01;
  std::vector<double> e(p);
  for (auto& x : e) x = n01(rng);
  std::vector<double> out = center_;
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) out[i] += chol_[i * p + j] * e[j];
  }
  return out;
}

ModelParams ParameterSampler::draw(std::mt19937_64& rng) const {
  const Variant v = variant_of(base_);
  const auto ai = alpha_field(v);
  auto values = field_values(base_);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto z = draw_log(rng);
    bool ok = true;
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      values[indices_[k]] = std::exp(z[k]);
      if (ai && indices_[k] == *ai && !(values[*ai] > alpha_min_ + kAlphaGuard)) ok = false;
    }
    if (ok) return make_params(v, values);
  }
  throw Error(ErrorCode::InvalidArgument, "alpha", "sampler cannot draw alpha above alpha_min");
}

// ---------------------------------------------------------------------------
// serialization

nlohmann::json to_json(const FitResult& r) {
  nlohmann::json j = to_json(ParamDocument{r.theta, r.month});
  j["objective"] = r.objective;
  j["status"] = std::string(to_string(r.status));
  j["evaluations"] = r.evaluations;
  j["penalties"] = r.penalties;
  j["alpha_min"] = r.alpha_min;
  j["fixed"] = r.fixed;
  j["stage1"] = r.stage1;
  j["stage2"] = r.stage2;
  nlohmann::json ci = nlohmann::json::object();
  for (const auto& c : r.intervals) {
    ci[c.name] = {{"estimate", c.estimate},
                  {"lo", c.lo},
                  {"hi", c.hi},
                  {"lower_bracketed", c.lower_bracketed},
                  {"upper_bracketed", c.upper_bracketed}};
  }
  j["intervals"] = ci;
  if (r.covariance) {
    const auto& c = *r.covariance;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < c.size(); ++i) {
      rows.push_back(std::vector<double>(c.matrix.begin() + i * c.size(), c.matrix.begin() + (i + 1) * c.size()));
    }
    nlohmann::json naive = nlohmann::json::array();
    for (std::size_t i = 0; i < c.size() && c.naive.size() == c.matrix.size(); ++i) {
      naive.push_back(std::vector<double>(c.naive.begin() + i * c.size(), c.naive.begin() + (i + 1) * c.size()));
    }
    j["covariance"] = {{"scale", "log"}, {"names", c.names}, {"center", c.center}, {"matrix", rows}, {"naive", naive}};
  } else {
    j["covariance"] = nullptr;
  }
  return j;
}

FitResult fit_result_from_json(const nlohmann::json& j) {
  FitResult r;
  const auto doc = param_document_from_json(j);
  r.theta = doc.params;
  r.month = doc.month;
  try {
    r.objective = j.value("objective", 0.0);
    r.status = j.value("status", std::string("converged")) == "converged" ? FitStatus::Converged
                                                                           : FitStatus::NonConvergence;
    r.evaluations = j.value("evaluations", 0L);
    r.penalties = j.value("penalties", 0L);
    r.alpha_min = j.value("alpha_min", 1.0);
    if (j.contains("fixed")) r.fixed = j.at("fixed").get<std::map<std::string, double>>();
    // non-finite values are written as null
    auto values = [&](const char* key, std::vector<double>& out) {
      if (!j.contains(key)) return;
      for (const auto& v : j.at(key)) out.push_back(v.is_null() ? kInf : v.get<double>());
    };
    values("stage1", r.stage1);
    values("stage2", r.stage2);
    if (j.contains("intervals")) {
      for (const auto& [name, c] : j.at("intervals").items()) {
        r.intervals.push_back({name, c.at("estimate").get<double>(), c.at("lo").get<double>(),
                               c.at("hi").get<double>(), c.at("lower_bracketed").get<bool>(),
                               c.at("upper_bracketed").get<bool>()});
      }
    }
    if (j.contains("covariance") && !j.at("covariance").is_null()) {
      const auto& c = j.at("covariance");
      ParamCovariance cov;
      cov.names = c.at("names").get<std::vector<std::string>>();
      cov.center = c.at("center").get<std::vector<double>>();
      for (const auto& row : c.at("matrix")) {
        for (const auto& x : row) cov.matrix.push_back(x.get<double>());
      }
      for (const auto& row : c.value("naive", nlohmann::json::array())) {
        for (const auto& x : row) cov.naive.push_back(x.get<double>());
      }
      if (cov.center.size() != cov.names.size() || cov.matrix.size() != cov.names.size() * cov.names.size()) {
        throw Error(ErrorCode::ParseError, "covariance", "covariance dimensions do not match its names");
      }
      r.covariance = std::move(cov);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "fit", std::string("malformed fit result: ") + e.what());
  }
  return r;
}

}  // namespace blrain
