#pragma once

#include "tgpr/kernels.hpp"
#include "tgpr/model.hpp"
#include "tgpr/rng.hpp"

namespace tgpr {

struct OutlierSpec {
  double fraction = 0.0;       // share of test subjects receiving the shift
  double magnitude_sd = 3.0;   // shift in units of the total generative SD
  double region_fraction = 0.1;  // contiguous share of outputs shifted
};

/// Ground-truth generator configuration. Data are drawn exactly from the
/// low-rank mixed-effects model: Y = X x_1 A + Z + E with latent-space
/// tensor-normal random effect and noise expanded through random orthonormal
/// bases.
struct GenConfig {
  std::size_t n_train = 40;
  std::size_t n_calibrate = 40;
  std::size_t n_test = 100;
  std::vector<std::size_t> shape{6, 6, 6};
  std::size_t covariate_count = 2;
  std::vector<int> signal_ranks{2, 2, 2};
  std::vector<int> noise_ranks{2, 2, 2};

  // Random-effect covariance across subjects: composite kernel on X.
  Vector raw_r;  // defaults set in make_dataset when empty
  double omega_variance = 1.0;
  double fixed_effect_scale = 0.5;
  double signal_latent_variance = 1.0;
  double signal_latent_lengthscale = 1.0;
  double noise_latent_variance = 1.0;
  double noise_latent_lengthscale = 1.0;

  OutlierSpec outliers;
  std::uint64_t seed = 1;

  std::size_t mode_count() const { return shape.size(); }
  std::size_t total_outputs() const { return shape_product(shape); }
};

struct Truth {
  DenseTensor fixed_effect;      // F x T...
  FactorBasis signal_basis;
  FactorBasis noise_basis;
  std::vector<Matrix> latent_c;      // per-mode signal covariances
  std::vector<Matrix> latent_sigma;  // per-mode noise covariances
  Vector raw_r;
  double omega_variance = 0.0;
  double total_sd = 0.0;             // rms marginal residual SD over outputs
  std::vector<int> test_labels;      // 1 = injected outlier
  std::size_t outlier_start = 0, outlier_length = 0;
};

struct SyntheticData {
  Dataset train;
  Dataset calibrate;
  Dataset test;
  Truth truth;
};

/// Draws a tensor with covariance (x)_i mode_covs[i] (x) row_cov via per-mode
/// Cholesky factors applied as mode products; the Kronecker product is never
/// materialized.
DenseTensor sample_tensor_normal(const Matrix& row_cov,
                                 const std::vector<Matrix>& mode_covs, Rng& rng);

SyntheticData make_dataset(const GenConfig& cfg);

/// Squared-exponential-plus-ridge latent covariance on index inputs; the
/// shared shape for generative C_i and Sigma_i.
Matrix latent_covariance(int size, double variance, double lengthscale);

}  // namespace tgpr
