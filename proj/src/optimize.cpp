#include "blrain/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace blrain::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe(double v) { return std::isfinite(v) ? v : kInf; }

bool small_change(double a, double b, const Options& o) {
  return std::abs(a - b) <= o.rel_tol * std::max(std::abs(a), std::abs(b)) + o.abs_tol;
}

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, const Options& opts) {
  const std::size_t n = x0.size();
  Result r;
  auto eval = [&](const std::vector<double>& x) {
    ++r.evaluations;
    return safe(f(x));
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;
  for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](double t, std::vector<double>& out) {
    const auto& worst = simplex[order[n]];
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (worst[j] - centroid[j]);
  };

  for (r.iterations = 0; r.iterations < opts.max_iter; ++r.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const double best = values[order[0]];
    const double worst = values[order[n]];
    if (std::isfinite(worst) && small_change(best, worst, opts)) {
      double diam = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 0; j < n; ++j) diam = std::max(diam, std::abs(simplex[order[i]][j] - simplex[order[0]][j]));
      }
      if (diam < 1e-4 || best <= opts.abs_tol) {
        r.converged = true;
        break;
      }
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j] / static_cast<double>(n);
    }
    const double second_worst = values[order[n - 1]];

    along(-1.0, trial);
    const double fr = eval(trial);
    if (fr < best) {
      along(-2.0, trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        simplex[order[n]] = trial2;
        values[order[n]] = fe;
      } else {
        simplex[order[n]] = trial;
        values[order[n]] = fr;
      }
      continue;
    }
    if (fr < second_worst) {
      simplex[order[n]] = trial;
      values[order[n]] = fr;
      continue;
    }
    // contraction: outside when the reflection beat the worst point
    const bool outside = fr < worst;
    along(outside ? -0.5 : 0.5, trial2);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : worst)) {
      simplex[order[n]] = trial2;
      values[order[n]] = fc;
      continue;
    }
    // shrink towards the best vertex
    const auto& b = simplex[order[0]];
    for (std::size_t i = 1; i <= n; ++i) {
      auto& v = simplex[order[i]];
      for (std::size_t j = 0; j < n; ++j) v[j] = b[j] + 0.5 * (v[j] - b[j]);
      values[order[i]] = eval(v);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
  r.x = simplex[best];
  r.value = values[best];
  return r;
}

std::vector<double> numeric_gradient(const Objective& f, const std::vector<double>& x, double step, int* evals) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + step;
    const double fp = f(xp);
    xp[i] = x[i] - step;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
    if (evals) *evals += 2;
  }
  return g;
}

Result bfgs(const Objective& f, std::vector<double> x, const Options& opts) {
  const std::size_t n = x.size();
  Result r;
  auto eval = [&](const std::vector<double>& p) {
    ++r.evaluations;
    return safe(f(p));
  };
  double fx = eval(x);
  r.x = x;
  r.value = fx;
  if (!std::isfinite(fx)) return r;

  // inverse Hessian approximation, row-major
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;
  auto g = numeric_gradient(f, x, opts.gradient_step, &r.evaluations);
  if (std::any_of(g.begin(), g.end(), [](double v) { return !std::isfinite(v); })) return r;

  std::vector<double> d(n), xn(n), s(n), y(n), Hy(n);
  for (r.iterations = 0; r.iterations < opts.max_iter; ++r.iterations) {
    double gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::abs(v));
    if (gnorm < 1e-12) {
      r.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      d[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) d[i] -= H[i * n + j] * g[j];
    }
    double slope = std::inner_product(d.begin(), d.end(), g.begin(), 0.0);
    if (!(slope < 0.0)) {
      // not a descent direction: reset to steepest descent
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        H[i * n + i] = 1.0;
        d[i] = -g[i];
      }
      slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
    }
    // cap the step on the log scale
    double dmax = 0.0;
    for (double v : d) dmax = std::max(dmax, std::abs(v));
    double t = dmax > 2.0 ? 2.0 / dmax : 1.0;
    double fn = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * d[i];
      fn = eval(xn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      r.converged = true;  // no further descent at gradient resolution
      break;
    }
    auto gn = numeric_gradient(f, xn, opts.gradient_step, &r.evaluations);
    if (std::any_of(gn.begin(), gn.end(), [](double v) { return !std::isfinite(v); })) {
      x = xn;
      fx = fn;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
    }
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    const bool done = small_change(fx, fn, opts);
    x = xn;
    const double f_prev = fx;
    fx = fn;
    g = gn;
    if (done && f_prev - fn <= opts.rel_tol * std::abs(fn) + opts.abs_tol) {
      r.converged = true;
      break;
    }
    if (sy > 1e-300) {
      for (std::size_t i = 0; i < n; ++i) {
        Hy[i] = 0.0;
        for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
      }
      const double yHy = std::inner_product(y.begin(), y.end(), Hy.begin(), 0.0);
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += (1.0 + yHy * rho) * rho * s[i] * s[j] - rho * (Hy[i] * s[j] + s[i] * Hy[j]);
        }
      }
    }
  }
  r.x = x;
  r.value = fx;
  return r;
}

}  // namespace blrain::opt
