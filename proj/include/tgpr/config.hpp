#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "tgpr/model.hpp"
#include "tgpr/synthetic.hpp"

namespace tgpr {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BenchConfig {
  std::size_t subjects = 32;
  std::vector<std::size_t> side_grid{8, 16, 32, 64, 128};  // T = side^2 on a 2-D grid
  std::vector<std::size_t> naive_sides{7, 9, 11};          // kept under the dense guard
  int ranks = 4;       // P_i = ranks, Q_i = ranks - 1 per mode
  int repetitions = 3;
};

struct ReproConfig {
  int repeats = 10;
  bool with_baseline = true;
};

/// One config file drives every subcommand; each command reads the sections
/// it needs. Unknown keys anywhere are an error.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = all cores
  std::string output_dir = "out";
  double top_fraction = 0.01;
  bool use_absolute = false;
  std::size_t batch_size = 8192;

  GenConfig synth;
  ModelConfig model;
  BenchConfig bench;
  ReproConfig repro;
  std::map<std::string, std::string> paths;

  std::string path_or(const std::string& key, const std::string& fallback) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

}  // namespace tgpr
