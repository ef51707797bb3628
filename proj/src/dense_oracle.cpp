#include "tgpr/dense_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "tgpr/reference.hpp"

namespace tgpr::dense_oracle {

namespace {

struct DensePieces {
  Matrix k;        // NQ x NQ projected covariance
  Vector v;        // projected residual, vec index q*N + n
  std::size_t n = 0, q = 0;
};

void check_guard(const FittedModel& model) {
  const std::size_t n = model.train_residual.extent(0);
  const std::size_t t = model.train_residual.size() / n;
  if (n * t > kMaxDenseElements)
    throw std::invalid_argument("dense oracle guard: N*T exceeds " +
                                std::to_string(kMaxDenseElements));
}

DensePieces assemble(const FittedModel& model) {
  check_guard(model);
  const std::size_t d = model.mode_count();

  std::vector<Matrix> sig_factors, noise_factors;
  for (std::size_t i = 0; i < d; ++i) {
    const Matrix& b = model.signal_basis.factors[i];
    const Matrix& lam = model.noise_basis.factors[i];
    const Matrix bcb = b * model.cache.latent_c[i] * b.transpose();
    sig_factors.push_back(lam.transpose() * bcb * lam);
    noise_factors.push_back(model.cache.latent_sigma[i]);
  }
  sig_factors.push_back(model.cache.R);
  noise_factors.push_back(model.cache.omega);

  DensePieces p;
  p.k = reference::kron_dense(sig_factors) + reference::kron_dense(noise_factors);

  // Project the residual onto the noise basis, then stack subjects fastest.
  DenseTensor proj = model.train_residual;
  for (std::size_t i = 0; i < d; ++i)
    proj = mode_product(proj, model.noise_basis.factors[i].transpose(), i + 1);
  p.n = proj.extent(0);
  p.q = proj.size() / p.n;
  p.v.resize(static_cast<Eigen::Index>(p.n * p.q));
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = 0; j < p.q; ++j)
      p.v[static_cast<Eigen::Index>(j * p.n + i)] = proj.data()[i * p.q + j];
  return p;
}

Eigen::LLT<Matrix> factorize(Matrix k) {
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success) {
    k.diagonal().array() += 1e-8 * k.diagonal().mean();
    llt.compute(k);
    if (llt.info() != Eigen::Success)
      throw NumericError("dense covariance factorization (not PD after jitter)");
  }
  return llt;
}

}  // namespace

double naive_lml(const FittedModel& model) {
  DensePieces p = assemble(model);
  const Eigen::LLT<Matrix> llt = factorize(p.k);
  const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  const double quad = p.v.dot(llt.solve(p.v));
  const double nd = static_cast<double>(p.n * p.q);
  const double lml = -0.5 * (nd * std::log(2.0 * M_PI) + logdet + quad);
  if (!std::isfinite(lml)) throw NumericError("dense log marginal likelihood");
  return lml;
}

DensePrediction predict(const FittedModel& model, const Matrix& x_star) {
  DensePieces p = assemble(model);
  const Eigen::LLT<Matrix> llt = factorize(p.k);
  const std::size_t d = model.mode_count();
  const std::size_t n_star = static_cast<std::size_t>(x_star.rows());

  const ParamLayout lay = param_layout(model.config);
  const Vector raw_r = model.raw_params.segment(lay.r_offset, lay.r_count);
  const Matrix r_star = kernel_eval(model.config.kernel_r, raw_r, x_star,
                                    model.train_x, /*same_inputs=*/false);
  const Matrix r_ss = kernel_eval(model.config.kernel_r, raw_r, x_star);

  std::vector<Matrix> cross_factors, prior_factors;
  std::vector<std::size_t> out_shape{n_star};
  for (std::size_t i = 0; i < d; ++i) {
    const Matrix& b = model.signal_basis.factors[i];
    const Matrix bcb = b * model.cache.latent_c[i] * b.transpose();
    cross_factors.push_back(bcb * model.noise_basis.factors[i]);
    prior_factors.push_back(bcb);
    out_shape.push_back(static_cast<std::size_t>(b.rows()));
  }
  cross_factors.push_back(r_star);
  prior_factors.push_back(r_ss);

  const Matrix cross = reference::kron_dense(cross_factors);  // N*T x NQ
  const Vector mean_vec = cross * llt.solve(p.v);
  const Matrix v_full =
      reference::kron_dense(prior_factors) - cross * llt.solve(cross.transpose());

  DensePrediction out;
  out.mean = DenseTensor(out_shape);
  out.variance_diag = DenseTensor(out_shape);
  const std::size_t t = out.mean.size() / n_star;
  for (std::size_t s = 0; s < n_star; ++s) {
    for (std::size_t j = 0; j < t; ++j) {
      out.mean.data()[s * t + j] = mean_vec[static_cast<Eigen::Index>(j * n_star + s)];
      out.variance_diag.data()[s * t + j] =
          v_full(static_cast<Eigen::Index>(j * n_star + s),
                 static_cast<Eigen::Index>(j * n_star + s));
    }
  }
  return out;
}

}  // namespace tgpr::dense_oracle
