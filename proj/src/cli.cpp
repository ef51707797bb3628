#include "tgpr/cli.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tgpr/alloc_tracker.hpp"
#include "tgpr/config.hpp"
#include "tgpr/dense_oracle.hpp"
#include "tgpr/model_io.hpp"
#include "tgpr/normative.hpp"
#include "tgpr/pipeline.hpp"
#include "tgpr/rng.hpp"
#include "tgpr/synthetic.hpp"

namespace tgpr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Matrix matrix_from_dtf(const std::string& path) {
  const DenseTensor t = read_dtf(path);
  if (t.order() != 2)
    throw ConfigError("expected an order-2 tensor in " + path);
  return ConstRowMap(t.data(), static_cast<Eigen::Index>(t.extent(0)),
                     static_cast<Eigen::Index>(t.extent(1)));
}

void write_matrix_dtf(const std::string& path, const Matrix& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  RowMap(t.data(), m.rows(), m.cols()) = m;
  write_dtf(path, t);
}

int cmd_synth(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const SyntheticData data = make_dataset(cfg.synth);

  write_matrix_dtf(cfg.path_or("train_x", "train_x.dtf"), data.train.X);
  write_dtf(cfg.path_or("train_y", "train_y.dtf"), data.train.Y);
  write_matrix_dtf(cfg.path_or("calibrate_x", "calibrate_x.dtf"), data.calibrate.X);
  write_dtf(cfg.path_or("calibrate_y", "calibrate_y.dtf"), data.calibrate.Y);
  write_matrix_dtf(cfg.path_or("test_x", "test_x.dtf"), data.test.X);
  write_dtf(cfg.path_or("test_y", "test_y.dtf"), data.test.Y);

  {
    std::ofstream f(cfg.path_or("labels", "labels.csv"));
    f << "subject_id,label\n";
    for (std::size_t i = 0; i < data.truth.test_labels.size(); ++i)
      f << i << "," << data.truth.test_labels[i] << "\n";
  }
  {
    json manifest;
    manifest["seed"] = cfg.synth.seed;
    manifest["total_sd"] = data.truth.total_sd;
    manifest["omega_variance"] = data.truth.omega_variance;
    manifest["outlier_start"] = data.truth.outlier_start;
    manifest["outlier_length"] = data.truth.outlier_length;
    std::vector<double> rr(data.truth.raw_r.data(),
                           data.truth.raw_r.data() + data.truth.raw_r.size());
    manifest["raw_r"] = rr;
    std::ofstream f(cfg.path_or("truth", "truth.json"));
    f << manifest.dump(2) << "\n";
  }
  std::cout << "synth: wrote train/calibrate/test splits to " << cfg.output_dir << "\n";
  return 0;
}

int cmd_fit(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  Dataset d;
  d.X = matrix_from_dtf(cfg.path_or("train_x", "train_x.dtf"));
  d.Y = read_dtf(cfg.path_or("train_y", "train_y.dtf"));

  ModelConfig mc = cfg.model;
  if (mc.ranks_p.empty())
    throw ConfigError("model.ranks_p is required for fit");
  for (std::size_t i = 0; i < mc.ranks_p.size(); ++i) {
    if (i + 1 >= d.Y.order() ||
        static_cast<std::size_t>(mc.ranks_p[i]) > d.Y.extent(i + 1))
      throw ConfigError("model.ranks_p[" + std::to_string(i) + "] exceeds tensor extent");
    if (static_cast<std::size_t>(mc.ranks_q[i]) > d.Y.extent(i + 1))
      throw ConfigError("model.ranks_q[" + std::to_string(i) + "] exceeds tensor extent");
  }

  const FittedModel model = fit(d, mc);
  save_model(cfg.path_or("model", "model.tgm"), model);
  {
    std::ofstream f(cfg.path_or("trace", "trace.csv"));
    f << "iteration,lml,grad_norm\n";
    for (const TraceRow& row : model.fit_info.trace)
      f << row.iteration << "," << fmt(-row.objective) << "," << fmt(row.grad_norm)
        << "\n";
  }
  std::cout << "fit: lml=" << fmt(model.fit_info.lml)
            << " grad_norm=" << fmt(model.fit_info.grad_norm)
            << " iterations=" << model.fit_info.iterations
            << (model.fit_info.converged ? " (converged)" : " (max iterations)") << "\n";
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const FittedModel model = load_model(cfg.path_or("model", "model.tgm"));
  const Matrix x_star = matrix_from_dtf(cfg.path_or("x_star", "test_x.dtf"));

  DenseTensor pred = apply_fixed_effect(model.fixed_effect, x_star);
  const DenseTensor mean = predict_mean(model, x_star);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += mean[i];
  const DenseTensor var = predict_variance_diag(model, x_star, cfg.batch_size);
  const DenseTensor u = aleatoric_variance(model);

  write_dtf(cfg.path_or("mean", "mean.dtf"), pred);
  write_dtf(cfg.path_or("variance", "variance.dtf"), var);
  write_dtf(cfg.path_or("aleatoric", "aleatoric.dtf"), u);

  const std::string y_star_path = cfg.path_or("y_star", "test_y.dtf");
  if (fs::exists(y_star_path)) {
    const DenseTensor y = read_dtf(y_star_path);
    write_dtf(cfg.path_or("snpm", "snpm.dtf"), compute_snpm(y, pred, var, u));
  }
  std::cout << "predict: wrote mean/variance/aleatoric"
            << (fs::exists(y_star_path) ? "/snpm" : "") << " tensors\n";
  return 0;
}

int cmd_score(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const DenseTensor snpm_cal = read_dtf(cfg.path_or("calibration_snpm", "snpm_cal.dtf"));
  const DenseTensor snpm_test = read_dtf(cfg.path_or("snpm", "snpm.dtf"));

  std::vector<int> labels;
  {
    std::ifstream f(cfg.path_or("labels", "labels.csv"));
    if (!f) throw ConfigError("cannot open labels csv");
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      labels.push_back(std::stoi(line.substr(comma + 1)));
    }
  }
  if (labels.size() != snpm_test.extent(0))
    throw ConfigError("labels count does not match test subjects");

  const std::vector<double> cal_stats =
      subject_statistics(snpm_cal, cfg.top_fraction, cfg.use_absolute);
  const GevdCalibration cal = gevd_fit(cal_stats);
  const std::vector<double> stats =
      subject_statistics(snpm_test, cfg.top_fraction, cfg.use_absolute);

  std::vector<double> probs(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) probs[i] = abnormality_prob(cal, stats[i]);

  {
    std::ofstream f(cfg.path_or("scores", "scores.csv"));
    f << "subject_id,statistic,abnormality_prob,label\n";
    for (std::size_t i = 0; i < stats.size(); ++i)
      f << i << "," << fmt(stats[i]) << "," << fmt(probs[i]) << "," << labels[i] << "\n";
  }
  const double a = auc(labels, probs);
  std::cout << "score: auc=" << fmt(a) << " (gev location=" << fmt(cal.location)
            << " scale=" << fmt(cal.scale) << " shape=" << fmt(cal.shape) << ")\n";
  return 0;
}

/// Builds a synthetic fitted model of a given grid size without optimizing;
/// used to time the likelihood paths. Full-rank models make the materialized
/// covariance genuinely NT x NT for the dense timings.
FittedModel bench_model(std::size_t n, std::size_t side, int ranks, std::uint64_t seed,
                        bool full_rank) {
  GenConfig gen;
  gen.n_train = n;
  gen.n_calibrate = 1;
  gen.n_test = 1;
  gen.shape = {side, side};
  gen.covariate_count = 2;
  const int rp = full_rank ? static_cast<int>(side) : ranks;
  const int rq = full_rank ? static_cast<int>(side) : ranks - 1;
  gen.signal_ranks = {rp, rp};
  gen.noise_ranks = {rq, rq};
  gen.seed = seed;
  const SyntheticData data = make_dataset(gen);

  ModelConfig mc;
  mc.ranks_p = gen.signal_ranks;
  mc.ranks_q = gen.noise_ranks;
  FittedModel model;
  model.config = mc;
  model.train_x = data.train.X;
  model.fixed_effect = fit_fixed_effect(data.train);
  model.train_residual = residual_tensor(data.train, model.fixed_effect);
  model.signal_basis = tucker_bases(model.train_residual, mc.ranks_p);
  DenseTensor zhat = project_reconstruct(model.train_residual, model.signal_basis);
  DenseTensor noise_proxy = model.train_residual;
  for (std::size_t i = 0; i < noise_proxy.size(); ++i) noise_proxy[i] -= zhat[i];
  model.noise_basis = tucker_bases(noise_proxy, mc.ranks_q);

  Rng rng(seed);
  const ParamLayout lay = param_layout(mc);
  model.raw_params.resize(lay.total);
  for (int k = 0; k < lay.total; ++k) model.raw_params[k] = rng.uniform(-1.0, 1.0);
  rebuild_cache(model);
  return model;
}

double fit_loglog_slope(const std::vector<double>& sizes, const std::vector<double>& secs) {
  const std::size_t n = sizes.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(sizes[i]);
    const double y = std::log(secs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (static_cast<double>(n) * sxy - sx * sy) /
         (static_cast<double>(n) * sxx - sx * sx);
}

int cmd_bench(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const BenchConfig& b = cfg.bench;
  std::ofstream csv(cfg.path_or("bench", "bench.csv"));
  csv << "T,naive_seconds,efficient_seconds,peak_alloc_bytes\n";

  auto time_call = [&](auto&& fn) {
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < b.repetitions; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      volatile double sink = fn();
      (void)sink;
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };

  std::vector<double> eff_t, eff_sec;
  for (std::size_t side : b.side_grid) {
    FittedModel model = bench_model(b.subjects, side, b.ranks, cfg.seed, false);
    alloc_tracker::reset();
    const double sec = time_call([&] {
      rebuild_cache(model);
      return efficient_lml(model);
    });
    const auto st = alloc_tracker::stats();
    const std::size_t t = side * side;
    csv << t << ",," << fmt(sec) << "," << st.max_single_bytes << "\n";
    eff_t.push_back(static_cast<double>(t));
    eff_sec.push_back(sec);
  }
  std::vector<double> nai_t, nai_sec;
  for (std::size_t side : b.naive_sides) {
    const std::size_t t = side * side;
    if (b.subjects * t > dense_oracle::kMaxDenseElements) continue;
    const FittedModel model = bench_model(b.subjects, side, b.ranks, cfg.seed, true);
    const double sec = time_call([&] { return dense_oracle::naive_lml(model); });
    csv << t << "," << fmt(sec) << ",,\n";
    nai_t.push_back(static_cast<double>(t));
    nai_sec.push_back(sec);
  }

  const double eff_slope = fit_loglog_slope(eff_t, eff_sec);
  std::cout << "bench: efficient exponent=" << fmt(eff_slope);
  if (nai_t.size() >= 2)
    std::cout << " naive exponent=" << fmt(fit_loglog_slope(nai_t, nai_sec));
  std::cout << "\n";
  return 0;
}

int cmd_repro(const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  std::ofstream csv(cfg.path_or("repro", "repro.csv"));
  csv << "repeat,auc,baseline_auc,ks_calibration,ks_samples\n";

  std::vector<double> aucs, base_aucs;
  for (int r = 0; r < cfg.repro.repeats; ++r) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
    const PipelineOutputs out = run_pipeline(cfg, seed, cfg.repro.with_baseline);
    aucs.push_back(out.auc_model);
    if (cfg.repro.with_baseline) base_aucs.push_back(out.auc_baseline);
    csv << r << "," << fmt(out.auc_model) << ","
        << (cfg.repro.with_baseline ? fmt(out.auc_baseline) : std::string()) << ","
        << fmt(out.ks_calibration) << "," << out.ks_samples << "\n";
  }
  auto mean_sd = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return std::make_pair(m, s);
  };
  const auto [m, s] = mean_sd(aucs);
  std::cout << "repro: auc " << fmt(m) << " +/- " << fmt(s) << " over "
            << cfg.repro.repeats << " repeats";
  if (cfg.repro.with_baseline) {
    const auto [bm, bs] = mean_sd(base_aucs);
    std::cout << "; baseline auc " << fmt(bm) << " +/- " << fmt(bs);
  }
  std::cout << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& argv) {
  CLI::App app{"multi-task GP tensor regression pipeline"};
  app.require_subcommand(1);
  std::string config_path;

  const std::vector<std::string> names{"synth", "fit", "predict", "score", "bench",
                                       "repro"};
  std::vector<CLI::App*> subs;
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    subs.push_back(sub);
  }
  int threads_override = -1;
  app.add_option("--threads", threads_override, "worker thread count (0 = all cores)");

  std::vector<const char*> cargs;
  cargs.push_back("tgpr");
  for (const std::string& a : argv) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    const RunConfig cfg = load_config(config_path);
    int threads = threads_override >= 0 ? threads_override : cfg.threads;
    if (threads > 0) omp_set_num_threads(threads);

    if (subs[0]->parsed()) return cmd_synth(cfg);
    if (subs[1]->parsed()) return cmd_fit(cfg);
    if (subs[2]->parsed()) return cmd_predict(cfg);
    if (subs[3]->parsed()) return cmd_score(cfg);
    if (subs[4]->parsed()) return cmd_bench(cfg);
    if (subs[5]->parsed()) return cmd_repro(cfg);
    std::cerr << "usage error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace tgpr::cli
