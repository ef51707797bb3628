#include "tgpr/normative.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tgpr/model.hpp"
#include "tgpr/optimize.hpp"

namespace tgpr {

DenseTensor compute_snpm(const DenseTensor& y, const DenseTensor& y_star,
                         const DenseTensor& v_star, const DenseTensor& aleatoric) {
  if (!y.same_shape(y_star) || !y.same_shape(v_star))
    throw std::invalid_argument("compute_snpm: tensor shapes do not conform");
  const std::size_t n = y.extent(0);
  const std::size_t t = y.size() / n;
  if (aleatoric.size() != t)
    throw std::invalid_argument("compute_snpm: aleatoric tensor does not match outputs");

  DenseTensor z(y.shape());
  bool bad = false;
  std::size_t bad_voxel = 0;
#pragma omp parallel for
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < t; ++j) {
      const double denom = v_star[i * t + j] + aleatoric[j];
      if (denom <= 0.0) {
#pragma omp critical
        {
          bad = true;
          bad_voxel = j;
        }
        continue;
      }
      z[i * t + j] = (y[i * t + j] - y_star[i * t + j]) / std::sqrt(denom);
    }
  }
  if (bad)
    throw std::invalid_argument("compute_snpm: nonpositive total variance at voxel " +
                                std::to_string(bad_voxel));
  return z;
}

double subject_statistic(const double* map, std::size_t t, double top_fraction,
                         bool use_absolute) {
  if (t == 0) throw std::invalid_argument("subject_statistic: empty deviation map");
  if (!(top_fraction > 0.0) || top_fraction > 1.0)
    throw std::invalid_argument("subject_statistic: top_fraction must be in (0, 1]");
  const std::size_t k =
      std::min<std::size_t>(t, static_cast<std::size_t>(std::ceil(top_fraction * t)));
  std::vector<double> vals(map, map + t);
  if (use_absolute)
    for (double& v : vals) v = std::abs(v);
  std::nth_element(vals.begin(), vals.begin() + (t - k), vals.end());
  return std::accumulate(vals.end() - k, vals.end(), 0.0) / static_cast<double>(k);
}

std::vector<double> subject_statistics(const DenseTensor& snpm, double top_fraction,
                                       bool use_absolute) {
  const std::size_t n = snpm.extent(0);
  const std::size_t t = snpm.size() / n;
  std::vector<double> out(n);
#pragma omp parallel for
  for (std::size_t i = 0; i < n; ++i)
    out[i] = subject_statistic(snpm.data() + i * t, t, top_fraction, use_absolute);
  return out;
}

double gev_log_likelihood(const GevdCalibration& cal, const std::vector<double>& stats) {
  const double mu = cal.location, sigma = cal.scale, xi = cal.shape;
  if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
  double ll = -static_cast<double>(stats.size()) * std::log(sigma);
  for (double x : stats) {
    const double z = (x - mu) / sigma;
    if (std::abs(xi) < 1e-8) {
      ll += -z - std::exp(-z);
    } else {
      const double t = 1.0 + xi * z;
      if (t <= 0.0) return -std::numeric_limits<double>::infinity();
      ll += -(1.0 + 1.0 / xi) * std::log(t) - std::pow(t, -1.0 / xi);
    }
  }
  return ll;
}

GevdCalibration gevd_fit(const std::vector<double>& stats) {
  if (stats.size() < 10)
    throw std::invalid_argument("gevd_fit: need at least 10 calibration statistics");
  const double mean =
      std::accumulate(stats.begin(), stats.end(), 0.0) / static_cast<double>(stats.size());
  double var = 0.0;
  for (double x : stats) var += (x - mean) * (x - mean);
  var /= static_cast<double>(stats.size() - 1);
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) throw std::invalid_argument("gevd_fit: degenerate all-equal inputs");

  // Optimize (mu, log sigma, xi); central differences are accurate enough for
  // this three-parameter problem.
  auto nll_of = [&stats](const Vector& p) {
    GevdCalibration c;
    c.location = p[0];
    c.scale = std::exp(p[1]);
    c.shape = p[2];
    return -gev_log_likelihood(c, stats);
  };
  const Objective obj = [&](const Vector& p, Vector& g) {
    const double f = nll_of(p);
    g.resize(3);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      Vector pp = p, pm = p;
      pp[k] += h;
      pm[k] -= h;
      const double fp = nll_of(pp), fm = nll_of(pm);
      if (!std::isfinite(fp) || !std::isfinite(fm))
        return std::numeric_limits<double>::infinity();
      g[k] = (fp - fm) / (2.0 * h);
    }
    return f;
  };

  // Gumbel moment start for the location, spec'd sigma and shape starts.
  Vector p0(3);
  p0[0] = mean - 0.45006 * sd;
  p0[1] = std::log(sd);
  p0[2] = 0.1;
  OptimizeOptions oo;
  oo.max_iterations = 500;
  oo.gradient_tolerance = 1e-8;
  const OptimizeResult r = lbfgs_minimize(obj, p0, oo);

  GevdCalibration cal;
  cal.location = r.x[0];
  cal.scale = std::exp(r.x[1]);
  cal.shape = r.x[2];
  return cal;
}

double gev_cdf(const GevdCalibration& cal, double x) {
  const double z = (x - cal.location) / cal.scale;
  if (std::abs(cal.shape) < 1e-8) return std::exp(-std::exp(-z));
  const double t = 1.0 + cal.shape * z;
  if (t <= 0.0) return cal.shape > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::pow(t, -1.0 / cal.shape));
}

double gev_quantile(const GevdCalibration& cal, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("gev_quantile: p in (0,1)");
  const double w = -std::log(p);
  if (std::abs(cal.shape) < 1e-8) return cal.location - cal.scale * std::log(w);
  return cal.location + cal.scale * (std::pow(w, -cal.shape) - 1.0) / cal.shape;
}

double abnormality_prob(const GevdCalibration& cal, double stat) {
  return gev_cdf(cal, stat);
}

double auc(const std::vector<int>& labels, const std::vector<double>& scores) {
  if (labels.size() != scores.size())
    throw std::invalid_argument("auc: labels and scores differ in length");
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over ties.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double rank_sum = 0.0;
  std::size_t n1 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] == 1) {
      rank_sum += rank[k];
      ++n1;
    } else if (labels[k] != 0) {
      throw std::invalid_argument("auc: labels must be 0 or 1");
    }
  }
  const std::size_t n0 = n - n1;
  if (n0 == 0 || n1 == 0) throw std::invalid_argument("auc: both classes required");
  const double u = rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
  return u / (static_cast<double>(n0) * static_cast<double>(n1));
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double standard_normal_ks(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = standard_normal_cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

}  // namespace tgpr
