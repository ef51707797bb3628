#include "tgpr/optimize.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace tgpr {

namespace {

struct Pair {
  Vector s, y;
  double rho;
};

Vector two_loop(const std::deque<Pair>& mem, const Vector& grad) {
  Vector q = grad;
  std::vector<double> alpha(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const Pair& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return q;
}

}  // namespace

OptimizeResult lbfgs_minimize(const Objective& f, const Vector& x0,
                              const OptimizeOptions& opts) {
  OptimizeResult res;
  res.x = x0;
  Vector grad(x0.size());
  res.fx = f(res.x, grad);
  if (!std::isfinite(res.fx))
    throw std::runtime_error("optimizer: non-finite objective at the starting point");
  res.grad_norm = grad.norm();
  res.trace.push_back({0, res.fx, res.grad_norm});

  std::deque<Pair> mem;
  constexpr double armijo = 1e-4;
  constexpr double curvature = 0.9;

  for (int it = 1; it <= opts.max_iterations; ++it) {
    if (res.grad_norm <= opts.gradient_tolerance) {
      res.converged = true;
      break;
    }
    Vector dir = -two_loop(mem, grad);
    double dg = dir.dot(grad);
    if (!(dg < 0.0)) {  // not a descent direction; reset memory
      mem.clear();
      dir = -grad;
      dg = -grad.squaredNorm();
    }

    double step = it == 1 ? std::min(1.0, 1.0 / std::max(res.grad_norm, 1e-12)) : 1.0;
    Vector x_new(x0.size()), g_new(x0.size());
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = res.x + step * dir;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.fx + armijo * step * dg) {
        // Weak curvature check; if it fails the step still shrinks f, accept
        // but drop the memory update below via the s.y guard.
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no progress possible along this direction

    Vector s = x_new - res.x;
    Vector y = g_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() &&
        (g_new.dot(dir) >= curvature * dg || sy > 0.0)) {
      mem.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(mem.size()) > opts.history) mem.pop_front();
    }

    res.x = x_new;
    res.fx = f_new;
    grad = g_new;
    res.grad_norm = grad.norm();
    res.iterations = it;
    res.trace.push_back({it, res.fx, res.grad_norm});
  }
  if (res.grad_norm <= opts.gradient_tolerance) res.converged = true;
  return res;
}

}  // namespace tgpr
