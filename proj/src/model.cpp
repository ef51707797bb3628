#include "tgpr/model.hpp"

#include <omp.h>

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "tgpr/eig.hpp"
#include "tgpr/rng.hpp"

namespace tgpr {

std::vector<std::size_t> FittedModel::data_shape() const {
  std::vector<std::size_t> s(train_residual.shape().begin() + 1,
                             train_residual.shape().end());
  return s;
}

DenseTensor fit_fixed_effect(const Dataset& d, bool allow_ridge) {
  const Eigen::Index n = d.X.rows();
  const Eigen::Index f = d.X.cols();
  if (f < 1) throw std::invalid_argument("fit_fixed_effect: need at least one covariate");
  if (d.Y.extent(0) != static_cast<std::size_t>(n))
    throw std::invalid_argument("fit_fixed_effect: X rows and Y subjects differ");

  Matrix gram = d.X.transpose() * d.X;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const double emax = es.eigenvalues().maxCoeff();
  const double emin = es.eigenvalues().minCoeff();
  const bool deficient = n < f || emin <= 1e-12 * std::max(emax, 1.0);
  if (deficient) {
    const double cond = emin > 0 ? emax / emin : std::numeric_limits<double>::infinity();
    if (!allow_ridge)
      throw std::invalid_argument(
          "fit_fixed_effect: rank-deficient design matrix, condition number " +
          std::to_string(cond));
    gram.diagonal().array() += 1e-8 * gram.trace() / static_cast<double>(f);
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericError("fit_fixed_effect normal equations");

  const std::size_t t = d.Y.size() / d.Y.extent(0);
  std::vector<std::size_t> a_shape = d.Y.shape();
  a_shape[0] = static_cast<std::size_t>(f);
  DenseTensor a(a_shape);
  ConstRowMap y(d.Y.data(), n, static_cast<Eigen::Index>(t));
  RowMap out(a.data(), f, static_cast<Eigen::Index>(t));

  const std::size_t nblk = std::max<std::size_t>(1, omp_get_max_threads());
  const std::size_t blk = (t + nblk - 1) / nblk;
#pragma omp parallel for
  for (std::size_t b = 0; b < nblk; ++b) {
    const std::size_t c0 = b * blk;
    if (c0 >= t) continue;
    const std::size_t c1 = std::min(t, c0 + blk);
    const Eigen::Index w = static_cast<Eigen::Index>(c1 - c0);
    out.middleCols(c0, w) = llt.solve(d.X.transpose() * y.middleCols(c0, w));
  }
  return a;
}

DenseTensor residual_tensor(const Dataset& d, const DenseTensor& fixed_effect) {
  DenseTensor yhat = mode_product(fixed_effect, d.X, 0);
  DenseTensor r = d.Y;
  const double* h = yhat.data();
  double* p = r.data();
#pragma omp parallel for
  for (std::size_t i = 0; i < r.size(); ++i) p[i] -= h[i];
  return r;
}

DenseTensor apply_fixed_effect(const DenseTensor& fixed_effect, const Matrix& x_star) {
  if (static_cast<std::size_t>(x_star.cols()) != fixed_effect.extent(0))
    throw std::invalid_argument("apply_fixed_effect: covariate count mismatch");
  return mode_product(fixed_effect, x_star, 0);
}

ParamLayout param_layout(const ModelConfig& cfg) {
  ParamLayout l;
  l.r_offset = 0;
  l.r_count = cfg.kernel_r.param_count();
  l.omega_offset = l.r_count;
  l.omega_count = cfg.kernel_omega.param_count();
  l.c_count = cfg.kernel_c.param_count();
  l.sigma_count = cfg.kernel_sigma.param_count();
  int off = l.omega_offset + l.omega_count;
  for (std::size_t i = 0; i < cfg.mode_count(); ++i) {
    l.c_offset.push_back(off);
    off += l.c_count;
  }
  for (std::size_t i = 0; i < cfg.mode_count(); ++i) {
    l.sigma_offset.push_back(off);
    off += l.sigma_count;
  }
  l.total = off;
  return l;
}

namespace {

Vector seg(const Vector& v, int off, int count) { return v.segment(off, count); }

void check_finite(const char* term, double v) {
  if (!std::isfinite(v)) throw NumericError(term);
}

// denom[n, q] = s_rt[n] * s_ct_kron[q] + 1, matching y_prime's layout.
void scale_by_denom(const FittedModel& m, const DenseTensor& src, DenseTensor& dst,
                    bool divide) {
  const std::size_t n = src.extent(0);
  const std::size_t q = src.size() / n;
  const double* in = src.data();
  double* out = dst.data();
#pragma omp parallel for
  for (std::size_t i = 0; i < n; ++i) {
    const double rn = m.cache.s_rt[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < q; ++j) {
      const double d = rn * m.cache.s_ct_kron[j] + 1.0;
      out[i * q + j] = divide ? in[i * q + j] / d : in[i * q + j] * d;
    }
  }
}

}  // namespace

void rebuild_cache(FittedModel& model) {
  const ModelConfig& cfg = model.config;
  const ParamLayout lay = param_layout(cfg);
  if (model.raw_params.size() != lay.total)
    throw std::invalid_argument("rebuild_cache: parameter vector length mismatch");
  const std::size_t d = cfg.mode_count();
  const Eigen::Index n = model.train_x.rows();
  ModelCache& c = model.cache;

  c.R = kernel_eval(cfg.kernel_r, seg(model.raw_params, lay.r_offset, lay.r_count),
                    model.train_x);
  c.omega = kernel_eval(
      cfg.kernel_omega, seg(model.raw_params, lay.omega_offset, lay.omega_count),
      index_inputs(static_cast<int>(n)));
  c.omega_mean_diag = c.omega.diagonal().mean();

  const SymEig eo = eig_sym(c.omega);
  c.s_omega = eo.eigvals;
  c.whiten_subjects = eo.eigvecs * eo.eigvals.cwiseSqrt().cwiseInverse().asDiagonal();

  const SymEig er = eig_sym(c.whiten_subjects.transpose() * c.R * c.whiten_subjects);
  c.s_rt = er.eigvals;
  c.phi0 = c.whiten_subjects * er.eigvecs;

  c.latent_c.assign(d, {});
  c.latent_sigma.assign(d, {});
  c.s_sigma.assign(d, {});
  c.s_ct.assign(d, {});
  c.noise_rot.assign(d, {});
  c.latent_whiten.assign(d, {});
  c.signal_in_noise.assign(d, {});
  c.predict_factor.assign(d, {});
  c.signal_diag.assign(d, {});
  c.noise_diag.assign(d, {});

  std::vector<Vector> s_ct_list(d);
  for (std::size_t i = 0; i < d; ++i) {
    const Matrix& b = model.signal_basis.factors[i];
    const Matrix& lam = model.noise_basis.factors[i];
    c.latent_c[i] = kernel_eval(cfg.kernel_c,
                                seg(model.raw_params, lay.c_offset[i], lay.c_count),
                                index_inputs(cfg.ranks_p[i]));
    c.latent_sigma[i] =
        kernel_eval(cfg.kernel_sigma,
                    seg(model.raw_params, lay.sigma_offset[i], lay.sigma_count),
                    index_inputs(cfg.ranks_q[i]));

    const SymEig es = eig_sym(c.latent_sigma[i]);
    c.s_sigma[i] = es.eigvals;
    const Matrix g = lam * es.eigvecs * es.eigvals.cwiseSqrt().cwiseInverse().asDiagonal();

    const Matrix bg = b.transpose() * g;  // P_i x Q_i
    const SymEig ec = eig_sym(bg.transpose() * c.latent_c[i] * bg);
    c.s_ct[i] = ec.eigvals;
    s_ct_list[i] = ec.eigvals;

    c.noise_rot[i] = g * ec.eigvecs;
    c.latent_whiten[i] = es.eigvecs *
                         es.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() * ec.eigvecs;
    c.signal_in_noise[i] = b.transpose() * c.noise_rot[i];
    c.predict_factor[i] = b * (c.latent_c[i] * c.signal_in_noise[i]);
    c.signal_diag[i] = (b * c.latent_c[i]).cwiseProduct(b).rowwise().sum();
    c.noise_diag[i] = (lam * c.latent_sigma[i]).cwiseProduct(lam).rowwise().sum();
  }
  c.s_ct_kron = kron_diag(s_ct_list);

  // Y' = residual x_1 phi0^T x_{i+1} J_i^T
  DenseTensor y = mode_product(model.train_residual, c.phi0.transpose(), 0);
  for (std::size_t i = 0; i < d; ++i)
    y = mode_product(y, c.noise_rot[i].transpose(), i + 1);
  c.y_prime = std::move(y);
  c.y_tilde = DenseTensor(c.y_prime.shape());
  scale_by_denom(model, c.y_prime, c.y_tilde, /*divide=*/true);
}

double efficient_lml(const FittedModel& model) {
  const ModelCache& c = model.cache;
  const std::size_t d = model.mode_count();
  const std::size_t n = c.y_prime.extent(0);
  const std::size_t q = c.y_prime.size() / n;

  double logdet_noise_modes = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double per_mode = c.s_sigma[i].array().log().sum();
    logdet_noise_modes += per_mode * static_cast<double>(q) /
                          static_cast<double>(c.s_sigma[i].size());
  }
  check_finite("log-determinant over S_Sigma", logdet_noise_modes);

  const double logdet_omega = c.s_omega.array().log().sum();
  check_finite("log-determinant over S_Omega", logdet_omega);

  double logdet_shifted = 0.0;
  double quad = 0.0;
  const double* yp = c.y_prime.data();
  const double* yt = c.y_tilde.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double rn = c.s_rt[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < q; ++j) {
      logdet_shifted += std::log(rn * c.s_ct_kron[j] + 1.0);
      quad += yp[i * q + j] * yt[i * q + j];
    }
  }
  check_finite("log-determinant over the shifted spectrum", logdet_shifted);
  check_finite("quadratic form", quad);

  const double nd = static_cast<double>(n) * static_cast<double>(q);
  return -0.5 * (nd * std::log(2.0 * M_PI) +
                 static_cast<double>(n) * logdet_noise_modes +
                 static_cast<double>(q) * logdet_omega + logdet_shifted + quad);
}

namespace {

// Shared trace/quadratic assembly: the derivative of the covariance is a
// single Kronecker product; mode_factors[i] set to nullptr means S_Ct (the
// already-diagonal case), subject_diag likewise for S_Rt.
struct GradPieces {
  const FittedModel& m;
  DenseTensor scratch;

  explicit GradPieces(const FittedModel& model)
      : m(model), scratch(model.cache.y_tilde.shape()) {}

  double trace_term(const Vector* subject_diag, const Matrix* subject_dense,
                    const std::vector<const Matrix*>& mode_dense,
                    const std::vector<char>& mode_is_identity) {
    const ModelCache& c = m.cache;
    const std::size_t d = m.mode_count();
    std::vector<Vector> diags(d);
    for (std::size_t i = 0; i < d; ++i) {
      if (mode_dense[i])
        diags[i] = mode_dense[i]->diagonal();
      else if (mode_is_identity[i])
        diags[i] = Vector::Ones(c.s_ct[i].size());
      else
        diags[i] = c.s_ct[i];
    }
    const dvec dk = kron_diag(diags);
    const std::size_t n = c.y_prime.extent(0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double rn = c.s_rt[static_cast<Eigen::Index>(i)];
      const double sub = subject_dense ? subject_dense->diagonal()[static_cast<Eigen::Index>(i)]
                         : (subject_diag ? (*subject_diag)[static_cast<Eigen::Index>(i)] : 1.0);
      double row = 0.0;
      for (std::size_t j = 0; j < dk.size(); ++j)
        row += dk[j] / (rn * c.s_ct_kron[j] + 1.0);
      acc += sub * row;
    }
    return acc;
  }

  double quad_term(const Vector* subject_diag, const Matrix* subject_dense,
                   const std::vector<const Matrix*>& mode_dense,
                   const std::vector<char>& mode_is_identity) {
    const ModelCache& c = m.cache;
    const std::size_t d = m.mode_count();
    DenseTensor z = c.y_tilde;
    if (subject_dense) z = mode_product(z, *subject_dense, 0);
    for (std::size_t i = 0; i < d; ++i)
      if (mode_dense[i]) z = mode_product(z, *mode_dense[i], i + 1);

    // Remaining diagonal factors apply as elementwise scales.
    std::vector<Vector> diags(d);
    bool any_diag = false;
    for (std::size_t i = 0; i < d; ++i) {
      if (mode_dense[i] || mode_is_identity[i]) {
        diags[i] = Vector::Ones(c.s_ct[i].size());
      } else {
        diags[i] = c.s_ct[i];
        any_diag = true;
      }
    }
    const std::size_t n = z.extent(0);
    const std::size_t q = z.size() / n;
    dvec scale;
    if (any_diag) scale = kron_diag(diags);
    const double* zt = z.data();
    const double* yt = c.y_tilde.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sub = 1.0;
      if (subject_diag) sub = (*subject_diag)[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < q; ++j) {
        const double s = any_diag ? scale[j] : 1.0;
        acc += yt[i * q + j] * zt[i * q + j] * s * sub;
      }
    }
    return acc;
  }
};

}  // namespace

Vector lml_gradient(const FittedModel& model) {
  const ModelConfig& cfg = model.config;
  const ParamLayout lay = param_layout(cfg);
  const ModelCache& c = model.cache;
  const std::size_t d = model.mode_count();
  const Eigen::Index n = model.train_x.rows();
  Vector grad(lay.total);
  GradPieces pieces(model);

  const std::vector<const Matrix*> no_dense(d, nullptr);
  const std::vector<char> none(d, 0);
  const std::vector<char> all_identity(d, 1);

  // Theta_R: subject factor phi0^T dR phi0, mode factors S_Ct.
  for (int j = 0; j < lay.r_count; ++j) {
    const Matrix dr = kernel_grad(
        cfg.kernel_r, seg(model.raw_params, lay.r_offset, lay.r_count), model.train_x, j);
    const Matrix m0 = c.phi0.transpose() * dr * c.phi0;
    const double tr = pieces.trace_term(nullptr, &m0, no_dense, none);
    const double qd = pieces.quad_term(nullptr, &m0, no_dense, none);
    grad[lay.r_offset + j] = -0.5 * tr + 0.5 * qd;
  }

  // Theta_Omega: subject factor phi0^T dOmega phi0, mode factors identity.
  for (int j = 0; j < lay.omega_count; ++j) {
    const Matrix dw = kernel_grad(
        cfg.kernel_omega, seg(model.raw_params, lay.omega_offset, lay.omega_count),
        index_inputs(static_cast<int>(n)), j);
    const Matrix m0 = c.phi0.transpose() * dw * c.phi0;
    const double tr = pieces.trace_term(nullptr, &m0, no_dense, all_identity);
    const double qd = pieces.quad_term(nullptr, &m0, no_dense, all_identity);
    grad[lay.omega_offset + j] = -0.5 * tr + 0.5 * qd;
  }

  // Theta_C_i: subject factor S_Rt, mode i factor E_i^T dC E_i, others S_Ct.
  for (std::size_t i = 0; i < d; ++i) {
    for (int j = 0; j < lay.c_count; ++j) {
      const Matrix dc = kernel_grad(
          cfg.kernel_c, seg(model.raw_params, lay.c_offset[i], lay.c_count),
          index_inputs(cfg.ranks_p[i]), j);
      const Matrix mi =
          c.signal_in_noise[i].transpose() * dc * c.signal_in_noise[i];
      std::vector<const Matrix*> mode_dense = no_dense;
      mode_dense[i] = &mi;
      const double tr = pieces.trace_term(&c.s_rt, nullptr, mode_dense, none);
      const double qd = pieces.quad_term(&c.s_rt, nullptr, mode_dense, none);
      grad[lay.c_offset[i] + j] = -0.5 * tr + 0.5 * qd;
    }
  }

  // Theta_Sigma_i: whitened noise is the identity, so every other factor drops.
  for (std::size_t i = 0; i < d; ++i) {
    for (int j = 0; j < lay.sigma_count; ++j) {
      const Matrix ds = kernel_grad(
          cfg.kernel_sigma, seg(model.raw_params, lay.sigma_offset[i], lay.sigma_count),
          index_inputs(cfg.ranks_q[i]), j);
      const Matrix mi = c.latent_whiten[i].transpose() * ds * c.latent_whiten[i];
      std::vector<const Matrix*> mode_dense = no_dense;
      mode_dense[i] = &mi;
      const double tr = pieces.trace_term(nullptr, nullptr, mode_dense, all_identity);
      const double qd = pieces.quad_term(nullptr, nullptr, mode_dense, all_identity);
      grad[lay.sigma_offset[i] + j] = -0.5 * tr + 0.5 * qd;
    }
  }

  if (!grad.allFinite()) throw NumericError("likelihood gradient");
  return grad;
}

FittedModel fit(const Dataset& d, const ModelConfig& cfg) {
  const std::size_t modes = d.data_mode_count();
  if (cfg.ranks_p.size() != modes || cfg.ranks_q.size() != modes)
    throw std::invalid_argument("fit: rank lists do not match the data order");
  if (d.subject_count() < 2) throw std::invalid_argument("fit: need at least two subjects");

  FittedModel model;
  model.config = cfg;
  model.train_x = d.X;
  model.fixed_effect = fit_fixed_effect(d);
  model.train_residual = residual_tensor(d, model.fixed_effect);

  model.signal_basis = tucker_bases(model.train_residual, cfg.ranks_p);
  DenseTensor zhat = project_reconstruct(model.train_residual, model.signal_basis);
  DenseTensor noise_proxy = model.train_residual;
  for (std::size_t i = 0; i < noise_proxy.size(); ++i) noise_proxy[i] -= zhat[i];
  model.noise_basis = tucker_bases(noise_proxy, cfg.ranks_q);

  const ParamLayout lay = param_layout(cfg);
  Rng rng(cfg.optimizer.seed);

  OptimizeOptions opts;
  opts.max_iterations = cfg.optimizer.max_iterations;
  opts.gradient_tolerance = cfg.optimizer.gradient_tolerance;

  // Line searches may probe overflow territory; treat any numeric failure as
  // a rejected point rather than an error.
  const Objective objective = [&model](const Vector& x, Vector& g) {
    model.raw_params = x;
    try {
      rebuild_cache(model);
      const double lml = efficient_lml(model);
      g = -lml_gradient(model);
      return -lml;
    } catch (const std::exception&) {
      g = Vector::Zero(x.size());
      return std::numeric_limits<double>::infinity();
    }
  };

  std::optional<OptimizeResult> best;
  const int restarts = std::max(1, cfg.optimizer.restarts);
  for (int r = 0; r < restarts; ++r) {
    Rng stream = rng.fork(1000 + static_cast<std::uint64_t>(r));
    Vector x0(lay.total);
    for (int k = 0; k < lay.total; ++k) x0[k] = stream.uniform(-1.0, 1.0);
    OptimizeResult res = lbfgs_minimize(objective, x0, opts);
    if (!best || res.fx < best->fx) best = std::move(res);
  }

  model.raw_params = best->x;
  rebuild_cache(model);
  model.fit_info.trace = std::move(best->trace);
  model.fit_info.lml = -best->fx;
  model.fit_info.grad_norm = best->grad_norm;
  model.fit_info.iterations = best->iterations;
  model.fit_info.converged = best->converged;
  return model;
}

DenseTensor predict_mean(const FittedModel& model, const Matrix& x_star) {
  if (x_star.cols() != model.train_x.cols())
    throw std::invalid_argument("predict_mean: covariate count mismatch");
  const ParamLayout lay = param_layout(model.config);
  const Matrix r_star =
      kernel_eval(model.config.kernel_r, seg(model.raw_params, lay.r_offset, lay.r_count),
                  x_star, model.train_x, /*same_inputs=*/false);
  const Matrix lead = r_star * model.cache.phi0;
  DenseTensor out = mode_product(model.cache.y_tilde, lead, 0);
  for (std::size_t i = 0; i < model.mode_count(); ++i)
    out = mode_product(out, model.cache.predict_factor[i], i + 1);
  return out;
}

DenseTensor predict_variance_diag(const FittedModel& model, const Matrix& x_star,
                                  std::size_t batch_size) {
  if (batch_size < 1) throw std::invalid_argument("predict_variance_diag: batch_size >= 1");
  if (x_star.cols() != model.train_x.cols())
    throw std::invalid_argument("predict_variance_diag: covariate count mismatch");
  const ModelCache& c = model.cache;
  const ParamLayout lay = param_layout(model.config);
  const std::size_t d = model.mode_count();
  const std::size_t n_star = static_cast<std::size_t>(x_star.rows());
  const std::size_t n = c.y_prime.extent(0);
  const std::size_t q = c.y_prime.size() / n;

  const Vector raw_r = seg(model.raw_params, lay.r_offset, lay.r_count);
  const Vector rss_diag =
      kernel_eval(model.config.kernel_r, raw_r, x_star).diagonal();
  const Matrix r_star = kernel_eval(model.config.kernel_r, raw_r, x_star,
                                    model.train_x, /*same_inputs=*/false);
  const Matrix lead = r_star * c.phi0;  // N* x N

  std::vector<Vector> sdiag(d);
  for (std::size_t i = 0; i < d; ++i) sdiag[i] = c.signal_diag[i];
  const dvec prior_t = kron_diag(sdiag);
  const std::size_t t = prior_t.size();

  std::vector<Matrix> w_sq(d);
  for (std::size_t i = 0; i < d; ++i)
    w_sq[i] = c.predict_factor[i].cwiseProduct(c.predict_factor[i]);

  std::vector<std::size_t> out_shape;
  out_shape.push_back(n_star);
  for (std::size_t i = 0; i < d; ++i)
    out_shape.push_back(static_cast<std::size_t>(c.predict_factor[i].rows()));
  DenseTensor out(out_shape);

  // Chunk test subjects so roughly batch_size diagonal entries are in flight.
  const std::size_t subjects_per_batch =
      std::max<std::size_t>(1, batch_size / std::max<std::size_t>(1, t));
  for (std::size_t s0 = 0; s0 < n_star; s0 += subjects_per_batch) {
    const std::size_t s1 = std::min(n_star, s0 + subjects_per_batch);
    const std::size_t ns = s1 - s0;

    std::vector<std::size_t> phi_shape;
    phi_shape.push_back(ns);
    for (std::size_t i = 0; i < d; ++i)
      phi_shape.push_back(static_cast<std::size_t>(c.s_ct[i].size()));
    DenseTensor phi(phi_shape);
#pragma omp parallel for
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t j = 0; j < q; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double a = lead(static_cast<Eigen::Index>(s0 + s),
                                static_cast<Eigen::Index>(i));
          acc += a * a / (c.s_rt[static_cast<Eigen::Index>(i)] * c.s_ct_kron[j] + 1.0);
        }
        phi.data()[s * q + j] = acc;
      }
    }
    DenseTensor corr = phi;
    for (std::size_t i = 0; i < d; ++i) corr = mode_product(corr, w_sq[i], i + 1);

#pragma omp parallel for
    for (std::size_t s = 0; s < ns; ++s) {
      const double rss = rss_diag[static_cast<Eigen::Index>(s0 + s)];
      double* row = out.data() + (s0 + s) * t;
      const double* cr = corr.data() + s * t;
      for (std::size_t j = 0; j < t; ++j) {
        double v = rss * prior_t[j] - cr[j];
        const double tol = 1e-10 * std::max(1.0, rss * prior_t[j]);
        if (v < -tol)
          throw NumericError("predictive variance (negative diagonal entry)");
        if (v < 0.0) v = 0.0;
        row[j] = v;
      }
    }
  }
  return out;
}

DenseTensor aleatoric_variance(const FittedModel& model) {
  const ModelCache& c = model.cache;
  const std::size_t d = model.mode_count();
  std::vector<Vector> nd(d);
  for (std::size_t i = 0; i < d; ++i) nd[i] = c.noise_diag[i];
  const dvec diag = kron_diag(nd);
  DenseTensor out(model.data_shape());
  for (std::size_t j = 0; j < diag.size(); ++j)
    out[j] = diag[j] * c.omega_mean_diag;
  return out;
}

}  // namespace tgpr
