#pragma once

#include <functional>
#include <vector>

namespace blrain::opt {

using Objective = std::function<double(const std::vector<double>&)>;

struct Options {
  double rel_tol = 1e-8;  // relative objective change
  double abs_tol = 1e-18;
  int max_iter = 2000;
  double initial_step = 0.25;   // Nelder-Mead simplex edge
  double gradient_step = 1e-5;  // central differences
};

struct Result {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Nelder-Mead simplex search. Non-finite objective values are treated as
/// +infinity, so infeasible regions can be encoded in the objective.
Result nelder_mead(const Objective& f, std::vector<double> x0, const Options& opts = {});

/// BFGS with central-difference gradients and a backtracking line search that
/// rejects non-finite trial points.
Result bfgs(const Objective& f, std::vector<double> x0, const Options& opts = {});

/// Central-difference gradient.
std::vector<double> numeric_gradient(const Objective& f, const std::vector<double>& x, double step, int* evals = nullptr);

}  // namespace blrain::opt
