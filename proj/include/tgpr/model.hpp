#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tgpr/factorization.hpp"
#include "tgpr/kernels.hpp"
#include "tgpr/optimize.hpp"
#include "tgpr/tensor_ops.hpp"

namespace tgpr {

/// Raised when a numeric routine hits a non-finite intermediate; `term` names
/// the failing quantity.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& term)
      : std::runtime_error("non-finite intermediate in " + term) {}
};

struct Dataset {
  Matrix X;       // N x F covariates
  DenseTensor Y;  // N x T_1 x ... x T_D

  std::size_t subject_count() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t data_mode_count() const { return Y.order() - 1; }
};

struct OptimizerSettings {
  int max_iterations = 200;
  double gradient_tolerance = 1e-5;
  std::uint64_t seed = 1;
  int restarts = 1;
};

struct ModelConfig {
  std::vector<int> ranks_p;  // signal ranks P_i
  std::vector<int> ranks_q;  // noise ranks Q_i
  KernelSpec kernel_r = full_composite_spec(KernelInput::feature_rows);
  KernelSpec kernel_omega = diagonal_spec(KernelInput::integer_index);
  KernelSpec kernel_c = full_composite_spec(KernelInput::integer_index);
  KernelSpec kernel_sigma = full_composite_spec(KernelInput::integer_index);
  OptimizerSettings optimizer;

  std::size_t mode_count() const { return ranks_p.size(); }
  int param_count() const {
    return kernel_r.param_count() + kernel_omega.param_count() +
           static_cast<int>(mode_count()) *
               (kernel_c.param_count() + kernel_sigma.param_count());
  }
  int hyperparam_count() const { return static_cast<int>(2 * mode_count()); }
};

/// Everything derived from (raw parameters, bases, training data); rebuilt
/// whenever the parameters change.
struct ModelCache {
  Matrix R;                      // train covariance of the random effect
  Matrix omega;                  // train covariance of the noise across subjects
  Vector s_omega;                // eigenvalues of Omega
  Matrix whiten_subjects;        // H = U_Omega S_Omega^-1/2
  Matrix phi0;                   // H U_Rt
  Vector s_rt;                   // eigenvalues of whitened R
  std::vector<Matrix> latent_c;  // C_i
  std::vector<Matrix> latent_sigma;
  std::vector<Vector> s_sigma;   // eigenvalues of Sigma_i
  std::vector<Vector> s_ct;      // eigenvalues of whitened projected signal
  std::vector<Matrix> noise_rot;    // J_i = Lambda_i U_Sigma S^-1/2 U_Ct   (T_i x Q_i)
  std::vector<Matrix> latent_whiten;  // U_Sigma S^-1/2 U_Ct                (Q_i x Q_i)
  std::vector<Matrix> signal_in_noise;  // E_i = B_i^T J_i                  (P_i x Q_i)
  std::vector<Matrix> predict_factor;   // W_i = B_i C_i E_i                (T_i x Q_i)
  std::vector<Vector> signal_diag;      // diag(B_i C_i B_i^T)
  std::vector<Vector> noise_diag;       // diag(Lambda_i Sigma_i Lambda_i^T)
  dvec s_ct_kron;                // length Q diagonal of (x) S_Ct
  DenseTensor y_prime;           // N x Q_1 x ... x Q_D
  DenseTensor y_tilde;           // y_prime / (s_rt (x) s_ct_kron + 1)
  double omega_mean_diag = 0.0;
};

struct FitInfo {
  std::vector<TraceRow> trace;  // (iteration, -lml, grad norm) of the winning run
  double lml = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FittedModel {
  ModelConfig config;
  DenseTensor fixed_effect;    // F x T_1 x ... x T_D
  FactorBasis signal_basis;    // B_i
  FactorBasis noise_basis;     // Lambda_i
  Vector raw_params;           // ordered (R, Omega, C_1..D, Sigma_1..D)
  Matrix train_x;
  DenseTensor train_residual;  // Y - Yhat on the training subjects
  ModelCache cache;
  FitInfo fit_info;

  std::size_t mode_count() const { return config.mode_count(); }
  std::vector<std::size_t> data_shape() const;  // T_1 ... T_D
};

/// Per-output OLS coefficients A (F x T_1 x ... x T_D). Falls back to a ridge
/// solve (lambda = 1e-8 tr(X^T X)/F) when X is rank deficient, unless
/// `allow_ridge` is false, in which case the condition number is reported.
DenseTensor fit_fixed_effect(const Dataset& d, bool allow_ridge = true);

/// Y - X x_1 A.
DenseTensor residual_tensor(const Dataset& d, const DenseTensor& fixed_effect);

/// X_star x_1 A.
DenseTensor apply_fixed_effect(const DenseTensor& fixed_effect, const Matrix& x_star);

/// Slices the flat parameter vector: [R | Omega | C_1..C_D | Sigma_1..Sigma_D].
struct ParamLayout {
  int r_offset, r_count;
  int omega_offset, omega_count;
  std::vector<int> c_offset, sigma_offset;
  int c_count, sigma_count;
  int total;
};
ParamLayout param_layout(const ModelConfig& cfg);

/// Recomputes the cache from raw parameters, bases, and training data.
void rebuild_cache(FittedModel& model);

/// Log marginal likelihood via the eigenvalue identities; never materializes
/// a T x T or NT x NT matrix. With reduced noise ranks this is the exact
/// likelihood of the data projected onto the noise basis (the full-rank case
/// reduces to the unprojected likelihood).
double efficient_lml(const FittedModel& model);

/// Analytic gradient of efficient_lml with respect to every raw parameter,
/// ordered as in ParamLayout.
Vector lml_gradient(const FittedModel& model);

FittedModel fit(const Dataset& d, const ModelConfig& cfg);

/// Random-effect posterior mean on new subjects (N* x T_1 x ... x T_D).
/// Callers add apply_fixed_effect for full predictions.
DenseTensor predict_mean(const FittedModel& model, const Matrix& x_star);

/// Diagonal of the predictive covariance, as a tensor (N* x T_1 x ...).
/// Processed in chunks of roughly `batch_size` entries; the result is
/// independent of the chosen batch size.
DenseTensor predict_variance_diag(const FittedModel& model, const Matrix& x_star,
                                  std::size_t batch_size);

/// Structured noise variance per output (T_1 x ... x T_D): the diagonal of
/// (x) Lambda_i Sigma_i Lambda_i^T scaled by the mean diagonal of Omega.
DenseTensor aleatoric_variance(const FittedModel& model);

}  // namespace tgpr
