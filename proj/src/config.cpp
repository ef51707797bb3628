#include "tgpr/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tgpr {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_kernel(const json& j, const char* key, KernelSpec& out, KernelInput input) {
  if (j.contains(key)) out = kernel_spec_from_string(j.at(key).get<std::string>(), input);
}

GenConfig parse_synth(const json& j) {
  reject_unknown(j, {"n_train", "n_calibrate", "n_test", "shape", "covariates",
                     "signal_ranks", "noise_ranks", "omega_variance",
                     "fixed_effect_scale", "signal_latent_variance",
                     "signal_latent_lengthscale", "noise_latent_variance",
                     "noise_latent_lengthscale", "outlier_fraction",
                     "outlier_magnitude_sd", "outlier_region_fraction", "raw_r"},
                 "synth");
  GenConfig g;
  read(j, "n_train", g.n_train);
  read(j, "n_calibrate", g.n_calibrate);
  read(j, "n_test", g.n_test);
  read(j, "shape", g.shape);
  read(j, "covariates", g.covariate_count);
  read(j, "signal_ranks", g.signal_ranks);
  read(j, "noise_ranks", g.noise_ranks);
  read(j, "omega_variance", g.omega_variance);
  read(j, "fixed_effect_scale", g.fixed_effect_scale);
  read(j, "signal_latent_variance", g.signal_latent_variance);
  read(j, "signal_latent_lengthscale", g.signal_latent_lengthscale);
  read(j, "noise_latent_variance", g.noise_latent_variance);
  read(j, "noise_latent_lengthscale", g.noise_latent_lengthscale);
  read(j, "outlier_fraction", g.outliers.fraction);
  read(j, "outlier_magnitude_sd", g.outliers.magnitude_sd);
  read(j, "outlier_region_fraction", g.outliers.region_fraction);
  if (j.contains("raw_r")) {
    const auto v = j.at("raw_r").get<std::vector<double>>();
    g.raw_r.resize(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) g.raw_r[static_cast<Eigen::Index>(i)] = v[i];
  }
  if (g.shape.empty()) throw ConfigError("synth.shape must not be empty");
  if (g.signal_ranks.size() != g.shape.size())
    throw ConfigError("synth.signal_ranks must match synth.shape length");
  if (g.noise_ranks.size() != g.shape.size())
    throw ConfigError("synth.noise_ranks must match synth.shape length");
  for (std::size_t i = 0; i < g.shape.size(); ++i) {
    if (g.signal_ranks[i] < 1 ||
        static_cast<std::size_t>(g.signal_ranks[i]) > g.shape[i])
      throw ConfigError("synth.signal_ranks[" + std::to_string(i) + "] outside [1, extent]");
    if (g.noise_ranks[i] < 1 || static_cast<std::size_t>(g.noise_ranks[i]) > g.shape[i])
      throw ConfigError("synth.noise_ranks[" + std::to_string(i) + "] outside [1, extent]");
  }
  if (!(g.outliers.fraction >= 0.0 && g.outliers.fraction < 1.0))
    throw ConfigError("synth.outlier_fraction must be in [0, 1)");
  return g;
}

ModelConfig parse_model(const json& j) {
  reject_unknown(j, {"ranks_p", "ranks_q", "kernel_r", "kernel_omega", "kernel_c",
                     "kernel_sigma", "max_iterations", "gradient_tolerance", "seed",
                     "restarts"},
                 "model");
  ModelConfig m;
  read(j, "ranks_p", m.ranks_p);
  read(j, "ranks_q", m.ranks_q);
  read_kernel(j, "kernel_r", m.kernel_r, KernelInput::feature_rows);
  read_kernel(j, "kernel_omega", m.kernel_omega, KernelInput::integer_index);
  read_kernel(j, "kernel_c", m.kernel_c, KernelInput::integer_index);
  read_kernel(j, "kernel_sigma", m.kernel_sigma, KernelInput::integer_index);
  read(j, "max_iterations", m.optimizer.max_iterations);
  read(j, "gradient_tolerance", m.optimizer.gradient_tolerance);
  read(j, "seed", m.optimizer.seed);
  read(j, "restarts", m.optimizer.restarts);
  if (m.ranks_p.size() != m.ranks_q.size())
    throw ConfigError("model.ranks_p and model.ranks_q must have equal length");
  for (std::size_t i = 0; i < m.ranks_p.size(); ++i)
    if (m.ranks_p[i] < 1 || m.ranks_q[i] < 1)
      throw ConfigError("model ranks must be >= 1 (mode " + std::to_string(i) + ")");
  return m;
}

BenchConfig parse_bench(const json& j) {
  reject_unknown(j, {"subjects", "side_grid", "naive_sides", "ranks", "repetitions"},
                 "bench");
  BenchConfig b;
  read(j, "subjects", b.subjects);
  read(j, "side_grid", b.side_grid);
  read(j, "naive_sides", b.naive_sides);
  read(j, "ranks", b.ranks);
  read(j, "repetitions", b.repetitions);
  if (b.ranks < 2) throw ConfigError("bench.ranks must be >= 2");
  return b;
}

ReproConfig parse_repro(const json& j) {
  reject_unknown(j, {"repeats", "with_baseline"}, "repro");
  ReproConfig r;
  read(j, "repeats", r.repeats);
  read(j, "with_baseline", r.with_baseline);
  if (r.repeats < 1) throw ConfigError("repro.repeats must be >= 1");
  return r;
}

}  // namespace

std::string RunConfig::path_or(const std::string& key, const std::string& fallback) const {
  auto it = paths.find(key);
  if (it != paths.end()) return it->second;
  return output_dir + "/" + fallback;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  reject_unknown(j, {"seed", "threads", "output_dir", "top_fraction", "use_absolute",
                     "batch_size", "synth", "model", "bench", "repro", "paths"},
                 "config root");
  RunConfig cfg;
  read(j, "seed", cfg.seed);
  read(j, "threads", cfg.threads);
  read(j, "output_dir", cfg.output_dir);
  read(j, "top_fraction", cfg.top_fraction);
  read(j, "use_absolute", cfg.use_absolute);
  read(j, "batch_size", cfg.batch_size);
  if (!(cfg.top_fraction > 0.0 && cfg.top_fraction <= 1.0))
    throw ConfigError("top_fraction must be in (0, 1]");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (j.contains("synth")) cfg.synth = parse_synth(j.at("synth"));
  if (j.contains("model")) cfg.model = parse_model(j.at("model"));
  if (j.contains("bench")) cfg.bench = parse_bench(j.at("bench"));
  if (j.contains("repro")) cfg.repro = parse_repro(j.at("repro"));
  if (j.contains("paths")) {
    for (auto it = j.at("paths").begin(); it != j.at("paths").end(); ++it)
      cfg.paths[it.key()] = it.value().get<std::string>();
  }
  cfg.synth.seed = cfg.seed;
  cfg.model.optimizer.seed = cfg.seed;
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  j["top_fraction"] = cfg.top_fraction;
  j["use_absolute"] = cfg.use_absolute;
  j["batch_size"] = cfg.batch_size;
  json s;
  s["n_train"] = cfg.synth.n_train;
  s["n_calibrate"] = cfg.synth.n_calibrate;
  s["n_test"] = cfg.synth.n_test;
  s["shape"] = cfg.synth.shape;
  s["covariates"] = cfg.synth.covariate_count;
  s["signal_ranks"] = cfg.synth.signal_ranks;
  s["noise_ranks"] = cfg.synth.noise_ranks;
  s["omega_variance"] = cfg.synth.omega_variance;
  s["fixed_effect_scale"] = cfg.synth.fixed_effect_scale;
  s["signal_latent_variance"] = cfg.synth.signal_latent_variance;
  s["signal_latent_lengthscale"] = cfg.synth.signal_latent_lengthscale;
  s["noise_latent_variance"] = cfg.synth.noise_latent_variance;
  s["noise_latent_lengthscale"] = cfg.synth.noise_latent_lengthscale;
  s["outlier_fraction"] = cfg.synth.outliers.fraction;
  s["outlier_magnitude_sd"] = cfg.synth.outliers.magnitude_sd;
  s["outlier_region_fraction"] = cfg.synth.outliers.region_fraction;
  if (cfg.synth.raw_r.size() > 0) {
    std::vector<double> v(cfg.synth.raw_r.data(),
                          cfg.synth.raw_r.data() + cfg.synth.raw_r.size());
    s["raw_r"] = v;
  }
  j["synth"] = s;
  json m;
  m["ranks_p"] = cfg.model.ranks_p;
  m["ranks_q"] = cfg.model.ranks_q;
  m["kernel_r"] = kernel_spec_to_string(cfg.model.kernel_r);
  m["kernel_omega"] = kernel_spec_to_string(cfg.model.kernel_omega);
  m["kernel_c"] = kernel_spec_to_string(cfg.model.kernel_c);
  m["kernel_sigma"] = kernel_spec_to_string(cfg.model.kernel_sigma);
  m["max_iterations"] = cfg.model.optimizer.max_iterations;
  m["gradient_tolerance"] = cfg.model.optimizer.gradient_tolerance;
  m["restarts"] = cfg.model.optimizer.restarts;
  j["model"] = m;
  json b;
  b["subjects"] = cfg.bench.subjects;
  b["side_grid"] = cfg.bench.side_grid;
  b["naive_sides"] = cfg.bench.naive_sides;
  b["ranks"] = cfg.bench.ranks;
  b["repetitions"] = cfg.bench.repetitions;
  j["bench"] = b;
  json r;
  r["repeats"] = cfg.repro.repeats;
  r["with_baseline"] = cfg.repro.with_baseline;
  j["repro"] = r;
  if (!cfg.paths.empty()) j["paths"] = cfg.paths;
  return j.dump(2);
}

}  // namespace tgpr
