#include "tgpr/st_gpr.hpp"

#include <omp.h>

#include <cmath>

#include "tgpr/rng.hpp"

namespace tgpr {

namespace {

// Negative log marginal likelihood and gradient for one output.
// raw = [kernel params..., log noise variance].
double neg_lml(const KernelSpec& spec, const Vector& raw, const Matrix& x,
               const Vector& y, Vector& grad) {
  const Eigen::Index n = x.rows();
  const int kp = spec.param_count();
  const double noise = std::exp(raw[kp]);
  Matrix k = kernel_eval(spec, raw.head(kp), x);
  k.diagonal().array() += noise;
  if (!k.allFinite()) {
    grad.setZero(raw.size());
    return std::numeric_limits<double>::infinity();
  }
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) {
    grad.setZero(raw.size());
    return std::numeric_limits<double>::infinity();
  }
  const Vector alpha = llt.solve(y);
  const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  const double nll =
      0.5 * (y.dot(alpha) + logdet + static_cast<double>(n) * std::log(2.0 * M_PI));

  const Matrix kinv = llt.solve(Matrix::Identity(n, n));
  const Matrix outer = alpha * alpha.transpose();
  grad.resize(raw.size());
  for (int j = 0; j < kp; ++j) {
    const Matrix dk = kernel_grad(spec, raw.head(kp), x, j);
    grad[j] = -0.5 * ((outer - kinv).cwiseProduct(dk)).sum();
  }
  grad[kp] = -0.5 * noise * (outer - kinv).trace();
  return nll;
}

}  // namespace

StGprResult st_gpr_fit_predict(const Dataset& d, const Matrix& x_star,
                               const StGprOptions& opts) {
  const std::size_t n = d.subject_count();
  const std::size_t t = d.Y.size() / n;
  const std::size_t n_star = static_cast<std::size_t>(x_star.rows());
  const int kp = opts.kernel.param_count();
  const int np = kp + 1;

  std::vector<std::size_t> out_shape = d.Y.shape();
  out_shape[0] = n_star;
  StGprResult res;
  res.mean = DenseTensor(out_shape);
  res.variance = DenseTensor(out_shape);
  res.failed.assign(t, 0);
  res.param_count = static_cast<std::size_t>(np) * t;
  res.raw_params.resize(np, static_cast<Eigen::Index>(t));

  ConstRowMap y_all(d.Y.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(t));
  Rng base(opts.optimizer.seed);
  OptimizeOptions oo;
  oo.max_iterations = opts.optimizer.max_iterations;
  oo.gradient_tolerance = opts.optimizer.gradient_tolerance;

  // One deterministic start per output, independent of thread schedule.
  Matrix inits(np, static_cast<Eigen::Index>(t));
  for (std::size_t j = 0; j < t; ++j) {
    Rng s = base.fork(j);
    for (int k = 0; k < np; ++k) inits(k, static_cast<Eigen::Index>(j)) = s.uniform(-1.0, 1.0);
  }

#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < t; ++j) {
    const Vector y = y_all.col(static_cast<Eigen::Index>(j));
    const Objective obj = [&](const Vector& xv, Vector& g) {
      return neg_lml(opts.kernel, xv, d.X, y, g);
    };
    Vector raw = inits.col(static_cast<Eigen::Index>(j));
    try {
      const OptimizeResult r = lbfgs_minimize(obj, raw, oo);
      raw = r.x;
    } catch (const std::exception&) {
      res.failed[j] = 1;  // keep initial parameters
    }
    res.raw_params.col(static_cast<Eigen::Index>(j)) = raw;

    const double noise = std::exp(raw[kp]);
    Matrix k = kernel_eval(opts.kernel, raw.head(kp), d.X);
    k.diagonal().array() += noise;
    Eigen::LLT<Matrix> llt(k);
    if (llt.info() != Eigen::Success) {
      k.diagonal().array() += 1e-8 * k.diagonal().mean();
      llt.compute(k);
    }
    const Vector alpha = llt.solve(y);
    const Matrix ks = kernel_eval(opts.kernel, raw.head(kp), x_star, d.X,
                                  /*same_inputs=*/false);
    const Vector kss = kernel_eval(opts.kernel, raw.head(kp), x_star).diagonal();
    const Vector mean = ks * alpha;
    const Matrix sol = llt.solve(ks.transpose());
    for (std::size_t s = 0; s < n_star; ++s) {
      const Eigen::Index si = static_cast<Eigen::Index>(s);
      double var = kss[si] - ks.row(si).dot(sol.col(si)) + noise;
      if (var < 0.0) var = 0.0;
      res.mean.data()[s * t + j] = mean[si];
      res.variance.data()[s * t + j] = var;
    }
  }
  return res;
}

}  // namespace tgpr
