#include "tgpr/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "tgpr/eig.hpp"

namespace tgpr {

namespace {

Matrix chol_factor(const Matrix& cov) {
  Matrix c = 0.5 * (cov + cov.transpose());
  c.diagonal().array() += 1e-10 * std::max(1.0, c.diagonal().mean());
  Eigen::LLT<Matrix> llt(c);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("sample_tensor_normal: covariance not PSD after jitter");
  return llt.matrixL();
}

}  // namespace

DenseTensor sample_tensor_normal(const Matrix& row_cov,
                                 const std::vector<Matrix>& mode_covs, Rng& rng) {
  std::vector<std::size_t> shape;
  shape.push_back(static_cast<std::size_t>(row_cov.rows()));
  for (const Matrix& m : mode_covs) shape.push_back(static_cast<std::size_t>(m.rows()));

  DenseTensor z(shape);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.normal();

  z = mode_product(z, chol_factor(row_cov), 0);
  for (std::size_t i = 0; i < mode_covs.size(); ++i)
    z = mode_product(z, chol_factor(mode_covs[i]), i + 1);
  return z;
}

Matrix latent_covariance(int size, double variance, double lengthscale) {
  Matrix k(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const double d = static_cast<double>(i - j) / lengthscale;
      k(i, j) = variance * std::exp(-0.5 * d * d);
    }
  k.diagonal().array() += 0.05 * variance;
  return k;
}

SyntheticData make_dataset(const GenConfig& cfg) {
  const std::size_t d = cfg.mode_count();
  if (cfg.signal_ranks.size() != d || cfg.noise_ranks.size() != d)
    throw std::invalid_argument("make_dataset: rank lists do not match shape");
  if (!(cfg.outliers.fraction >= 0.0 && cfg.outliers.fraction < 1.0))
    throw std::invalid_argument("make_dataset: outlier fraction must be in [0, 1)");
  const std::size_t n_all = cfg.n_train + cfg.n_calibrate + cfg.n_test;
  const std::size_t t = cfg.total_outputs();

  Rng root(cfg.seed);
  Rng rng_x = root.fork(1);
  Rng rng_a = root.fork(2);
  Rng rng_bases = root.fork(3);
  Rng rng_z = root.fork(4);
  Rng rng_e = root.fork(5);
  Rng rng_out = root.fork(6);

  const Matrix x_all = rng_x.normal_matrix(static_cast<Eigen::Index>(n_all),
                                           static_cast<Eigen::Index>(cfg.covariate_count));

  Truth truth;
  std::vector<std::size_t> a_shape{cfg.covariate_count};
  for (std::size_t e : cfg.shape) a_shape.push_back(e);
  truth.fixed_effect = DenseTensor(a_shape);
  for (std::size_t i = 0; i < truth.fixed_effect.size(); ++i)
    truth.fixed_effect[i] = cfg.fixed_effect_scale * rng_a.normal();

  truth.raw_r = cfg.raw_r;
  if (truth.raw_r.size() == 0) {
    // Defaults: mild linear + SE signal across subjects, small ridge.
    truth.raw_r = Vector(4);
    truth.raw_r << std::log(0.3), std::log(0.7), std::log(1.0), std::log(0.3);
  }
  truth.omega_variance = cfg.omega_variance;

  for (std::size_t i = 0; i < d; ++i) {
    truth.signal_basis.factors.push_back(random_orthonormal(
        static_cast<Eigen::Index>(cfg.shape[i]), cfg.signal_ranks[i], rng_bases));
    truth.noise_basis.factors.push_back(random_orthonormal(
        static_cast<Eigen::Index>(cfg.shape[i]), cfg.noise_ranks[i], rng_bases));
    truth.latent_c.push_back(latent_covariance(cfg.signal_ranks[i],
                                               cfg.signal_latent_variance,
                                               cfg.signal_latent_lengthscale));
    truth.latent_sigma.push_back(latent_covariance(cfg.noise_ranks[i],
                                                   cfg.noise_latent_variance,
                                                   cfg.noise_latent_lengthscale));
  }
  truth.signal_basis.ranks = cfg.signal_ranks;
  truth.noise_basis.ranks = cfg.noise_ranks;

  const KernelSpec spec_r = full_composite_spec(KernelInput::feature_rows);
  const Matrix r_all = kernel_eval(spec_r, truth.raw_r, x_all);

  // Latent draws, expanded through the orthonormal bases.
  DenseTensor z = sample_tensor_normal(r_all, truth.latent_c, rng_z);
  for (std::size_t i = 0; i < d; ++i)
    z = mode_product(z, truth.signal_basis.factors[i], i + 1);
  const Matrix omega = cfg.omega_variance *
                       Matrix::Identity(static_cast<Eigen::Index>(n_all),
                                        static_cast<Eigen::Index>(n_all));
  DenseTensor e = sample_tensor_normal(omega, truth.latent_sigma, rng_e);
  for (std::size_t i = 0; i < d; ++i)
    e = mode_product(e, truth.noise_basis.factors[i], i + 1);

  std::vector<std::size_t> y_shape{n_all};
  for (std::size_t ext : cfg.shape) y_shape.push_back(ext);
  DenseTensor y_all(y_shape);
  {
    const DenseTensor yhat = mode_product(truth.fixed_effect, x_all, 0);
    for (std::size_t i = 0; i < y_all.size(); ++i) y_all[i] = yhat[i] + z[i] + e[i];
  }

  // Marginal residual variance per output, averaged over subjects: the scale
  // used to calibrate the injected shifts.
  {
    std::vector<Vector> sd(d), ndg(d);
    for (std::size_t i = 0; i < d; ++i) {
      const Matrix& b = truth.signal_basis.factors[i];
      const Matrix& l = truth.noise_basis.factors[i];
      sd[i] = (b * truth.latent_c[i]).cwiseProduct(b).rowwise().sum();
      ndg[i] = (l * truth.latent_sigma[i]).cwiseProduct(l).rowwise().sum();
    }
    const dvec sdk = kron_diag(sd);
    const dvec ndk = kron_diag(ndg);
    const double r_mean_diag = r_all.diagonal().mean();
    double acc = 0.0;
    for (std::size_t j = 0; j < t; ++j)
      acc += sdk[j] * r_mean_diag + ndk[j] * cfg.omega_variance;
    truth.total_sd = std::sqrt(acc / static_cast<double>(t));
  }

  auto slice = [&](std::size_t row0, std::size_t rows) {
    Dataset ds;
    ds.X = x_all.middleRows(static_cast<Eigen::Index>(row0), static_cast<Eigen::Index>(rows));
    std::vector<std::size_t> s = y_shape;
    s[0] = rows;
    ds.Y = DenseTensor(s);
    std::copy(y_all.data() + row0 * t, y_all.data() + (row0 + rows) * t, ds.Y.data());
    return ds;
  };

  SyntheticData out;
  out.train = slice(0, cfg.n_train);
  out.calibrate = slice(cfg.n_train, cfg.n_calibrate);
  out.test = slice(cfg.n_train + cfg.n_calibrate, cfg.n_test);

  // Outliers: constant shift over one contiguous row-major block of outputs,
  // injected into a seeded subset of test subjects only.
  truth.test_labels.assign(cfg.n_test, 0);
  if (cfg.outliers.fraction > 0.0 && cfg.n_test > 0) {
    const std::size_t len = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(cfg.outliers.region_fraction *
                                              static_cast<double>(t))));
    truth.outlier_length = std::min(len, t);
    truth.outlier_start =
        truth.outlier_length >= t
            ? 0
            : static_cast<std::size_t>(rng_out.uniform01() *
                                       static_cast<double>(t - truth.outlier_length));
    const double shift = cfg.outliers.magnitude_sd * truth.total_sd;
    const std::size_t n_out = static_cast<std::size_t>(
        std::round(cfg.outliers.fraction * static_cast<double>(cfg.n_test)));
    // Seeded subject subset without replacement.
    std::vector<std::size_t> order(cfg.n_test);
    for (std::size_t i = 0; i < cfg.n_test; ++i) order[i] = i;
    for (std::size_t i = cfg.n_test; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng_out.uniform01() * i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t k = 0; k < n_out; ++k) {
      const std::size_t subj = order[k];
      truth.test_labels[subj] = 1;
      double* row = out.test.Y.data() + subj * t;
      for (std::size_t j = 0; j < truth.outlier_length; ++j)
        row[truth.outlier_start + j] += shift;
    }
  }

  out.truth = std::move(truth);
  return out;
}

}  // namespace tgpr
