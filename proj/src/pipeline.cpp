#include "tgpr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgpr/normative.hpp"
#include "tgpr/synthetic.hpp"

namespace tgpr {

namespace {

DenseTensor snpm_for_baseline(const StGprResult& fitted, const DenseTensor& fixed,
                              const DenseTensor& y) {
  DenseTensor pred = fixed;
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += fitted.mean[i];
  DenseTensor z(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double denom = fitted.variance[i];
    if (denom <= 0.0)
      throw NumericError("baseline predictive variance (nonpositive entry)");
    z[i] = (y[i] - pred[i]) / std::sqrt(denom);
  }
  return z;
}

}  // namespace

DenseTensor snpm_for(const FittedModel& model, const Dataset& subjects,
                     std::size_t batch_size) {
  DenseTensor pred = apply_fixed_effect(model.fixed_effect, subjects.X);
  const DenseTensor mean = predict_mean(model, subjects.X);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += mean[i];
  const DenseTensor var = predict_variance_diag(model, subjects.X, batch_size);
  const DenseTensor u = aleatoric_variance(model);
  return compute_snpm(subjects.Y, pred, var, u);
}

PipelineOutputs run_pipeline(const RunConfig& cfg, std::uint64_t seed,
                             bool with_baseline) {
  GenConfig gen = cfg.synth;
  gen.seed = seed;
  const SyntheticData data = make_dataset(gen);

  ModelConfig mc = cfg.model;
  mc.optimizer.seed = seed;
  const FittedModel model = fit(data.train, mc);

  const DenseTensor snpm_cal = snpm_for(model, data.calibrate, cfg.batch_size);
  const DenseTensor snpm_test = snpm_for(model, data.test, cfg.batch_size);

  PipelineOutputs out;
  {
    std::vector<double> pooled(snpm_cal.data(), snpm_cal.data() + snpm_cal.size());
    out.ks_calibration = standard_normal_ks(std::move(pooled));
    out.ks_samples = snpm_cal.size();
  }

  const bool both_classes =
      std::count(data.truth.test_labels.begin(), data.truth.test_labels.end(), 1) > 0 &&
      std::count(data.truth.test_labels.begin(), data.truth.test_labels.end(), 0) > 0;

  const std::vector<double> cal_stats =
      subject_statistics(snpm_cal, cfg.top_fraction, cfg.use_absolute);
  const GevdCalibration cal = gevd_fit(cal_stats);
  const std::vector<double> test_stats =
      subject_statistics(snpm_test, cfg.top_fraction, cfg.use_absolute);
  std::vector<double> probs(test_stats.size());
  for (std::size_t i = 0; i < test_stats.size(); ++i)
    probs[i] = abnormality_prob(cal, test_stats[i]);
  out.auc_model = both_classes ? auc(data.truth.test_labels, probs)
                               : std::numeric_limits<double>::quiet_NaN();

  if (with_baseline) {
    StGprOptions so;
    so.optimizer.seed = seed;
    so.optimizer.max_iterations = cfg.model.optimizer.max_iterations;
    so.optimizer.gradient_tolerance = cfg.model.optimizer.gradient_tolerance;
    // The baseline shares the fixed effect; its GPs see the training residuals.
    const DenseTensor a = fit_fixed_effect(data.train);
    Dataset resid{data.train.X, residual_tensor(data.train, a)};

    Matrix x_eval(data.calibrate.X.rows() + data.test.X.rows(), data.train.X.cols());
    x_eval << data.calibrate.X, data.test.X;
    const StGprResult base = st_gpr_fit_predict(resid, x_eval, so);

    const std::size_t t = resid.Y.size() / resid.Y.extent(0);
    auto take_rows = [&](const StGprResult& r, std::size_t row0, std::size_t rows) {
      StGprResult s;
      std::vector<std::size_t> shape = r.mean.shape();
      shape[0] = rows;
      s.mean = DenseTensor(shape);
      s.variance = DenseTensor(shape);
      std::copy(r.mean.data() + row0 * t, r.mean.data() + (row0 + rows) * t,
                s.mean.data());
      std::copy(r.variance.data() + row0 * t, r.variance.data() + (row0 + rows) * t,
                s.variance.data());
      return s;
    };
    const std::size_t n_cal = data.calibrate.subject_count();
    const StGprResult base_cal = take_rows(base, 0, n_cal);
    const StGprResult base_test = take_rows(base, n_cal, data.test.subject_count());

    const DenseTensor npm_cal = snpm_for_baseline(
        base_cal, apply_fixed_effect(a, data.calibrate.X), data.calibrate.Y);
    const DenseTensor npm_test = snpm_for_baseline(
        base_test, apply_fixed_effect(a, data.test.X), data.test.Y);

    const std::vector<double> bc =
        subject_statistics(npm_cal, cfg.top_fraction, cfg.use_absolute);
    const GevdCalibration bcal = gevd_fit(bc);
    const std::vector<double> bt =
        subject_statistics(npm_test, cfg.top_fraction, cfg.use_absolute);
    std::vector<double> bp(bt.size());
    for (std::size_t i = 0; i < bt.size(); ++i) bp[i] = abnormality_prob(bcal, bt[i]);
    out.auc_baseline = both_classes ? auc(data.truth.test_labels, bp)
                                    : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace tgpr
