#pragma once

#include "tgpr/model.hpp"

namespace tgpr {

/// Small-scale brute-force counterparts of the efficient routines. These
/// materialize the structured covariance and run dense solves; they exist to
/// cross-check the eigenvalue-identity path and are guarded against large
/// inputs (N*T must stay <= 4096).
namespace dense_oracle {

constexpr std::size_t kMaxDenseElements = 4096;

/// Gaussian log-density of the training residual under the materialized
/// covariance (x)_i Lambda' B C B^T Lambda' (x) R + (x)_i Sigma (x) Omega on
/// the noise-basis projection of the data. Adds diagonal jitter only if the
/// plain Cholesky fails.
double naive_lml(const FittedModel& model);

struct DensePrediction {
  DenseTensor mean;           // N* x T_1 x ... x T_D (random-effect part)
  DenseTensor variance_diag;  // N* x T_1 x ... x T_D
};

DensePrediction predict(const FittedModel& model, const Matrix& x_star);

}  // namespace dense_oracle

}  // namespace tgpr
