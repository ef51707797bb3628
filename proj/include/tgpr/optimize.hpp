#pragma once

#include <functional>

#include "tgpr/tensor_ops.hpp"

namespace tgpr {

struct OptimizeOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-5;
  int history = 10;  // L-BFGS memory
};

struct TraceRow {
  int iteration;
  double objective;   // value being minimized
  double grad_norm;
};

struct OptimizeResult {
  Vector x;
  double fx = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;   // gradient tolerance reached
  std::vector<TraceRow> trace;
};

/// Objective: fills grad, returns f(x). Must return a finite value or +inf to
/// reject the point (line search backs off).
using Objective = std::function<double(const Vector& x, Vector& grad)>;

/// Limited-memory BFGS with Armijo/curvature backtracking line search.
/// Minimizes f; monotone in f across accepted iterates.
OptimizeResult lbfgs_minimize(const Objective& f, const Vector& x0,
                              const OptimizeOptions& opts);

}  // namespace tgpr
