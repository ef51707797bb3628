#pragma once

#include "tgpr/tensor_ops.hpp"

namespace tgpr {

/// Standardized deviation maps: (Y - Y*) / sqrt(V* + U), with the per-output
/// noise variance U broadcast over subjects.
DenseTensor compute_snpm(const DenseTensor& y, const DenseTensor& y_star,
                         const DenseTensor& v_star, const DenseTensor& aleatoric);

/// Mean of the largest ceil(top_fraction * T) entries of one subject's
/// deviation map. Signed values by default; set use_absolute to rank by |z|.
double subject_statistic(const double* map, std::size_t t, double top_fraction,
                         bool use_absolute = false);

std::vector<double> subject_statistics(const DenseTensor& snpm, double top_fraction,
                                       bool use_absolute = false);

/// Generalized extreme value calibration fitted by maximum likelihood.
struct GevdCalibration {
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;
  double top_fraction = 0.01;
};

GevdCalibration gevd_fit(const std::vector<double>& stats);

double gev_log_likelihood(const GevdCalibration& cal, const std::vector<double>& stats);
double gev_cdf(const GevdCalibration& cal, double x);
double gev_quantile(const GevdCalibration& cal, double p);

/// CDF of the fitted calibration, read as the probability the subject is
/// abnormal.
double abnormality_prob(const GevdCalibration& cal, double stat);

/// Area under the ROC curve via the rank statistic, ties counted one half.
double auc(const std::vector<int>& labels, const std::vector<double>& scores);

double standard_normal_cdf(double x);

/// Kolmogorov-Smirnov distance between the sample and a standard normal.
double standard_normal_ks(std::vector<double> samples);

/// Asymptotic critical value of the one-sample KS statistic.
double ks_critical_value(std::size_t n, double alpha);

}  // namespace tgpr
