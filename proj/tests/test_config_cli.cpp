#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "tgpr/cli.hpp"
#include "tgpr/config.hpp"
#include "tgpr/model_io.hpp"

using namespace tgpr;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = (fs::temp_directory_path() / name).string();
  std::ofstream f(path);
  f << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("minimal config fills defaults") {
    const RunConfig cfg = parse_config("{\"seed\": 3}");
    CHECK(cfg.seed == 3);
    CHECK(cfg.top_fraction == doctest::Approx(0.01));
    CHECK(cfg.model.optimizer.seed == 3);
    CHECK(cfg.synth.seed == 3);
  }
  SUBCASE("unknown keys are named") {
    CHECK_THROWS_WITH_AS((void)parse_config("{\"sead\": 3}"),
                         doctest::Contains("sead"), ConfigError);
    CHECK_THROWS_WITH_AS(
        (void)parse_config("{\"model\": {\"ranks_pp\": [1]}}"),
        doctest::Contains("ranks_pp"), ConfigError);
  }
  SUBCASE("rank outside the extents is named") {
    CHECK_THROWS_WITH_AS(
        (void)parse_config(R"({"synth": {"shape": [3, 3], "signal_ranks": [4, 1],
                               "noise_ranks": [1, 1]}})"),
        doctest::Contains("signal_ranks[0]"), ConfigError);
  }
  SUBCASE("parse errors carry position info") {
    CHECK_THROWS_AS((void)parse_config("{broken"), ConfigError);
  }
  SUBCASE("serialize/parse round trip") {
    RunConfig cfg = parse_config("{\"seed\": 11, \"top_fraction\": 0.05}");
    cfg.paths["train_x"] = "a.dtf";
    const std::string text = serialize_config(cfg);
    const RunConfig back = parse_config(text);
    CHECK(back.seed == cfg.seed);
    CHECK(back.top_fraction == cfg.top_fraction);
    CHECK(back.paths.at("train_x") == "a.dtf");
    CHECK(serialize_config(back) == text);
  }
}

TEST_CASE("cli surface") {
  const fs::path base = fs::temp_directory_path() / "tgpr_cli_test";
  fs::remove_all(base);
  fs::create_directories(base);

  SUBCASE("missing config exits 2") {
    CHECK(cli::run({"fit", "--config", (base / "missing.json").string()}) == 2);
  }
  SUBCASE("unknown subcommand exits 2") {
    CHECK(cli::run({"explode", "--config", "x"}) == 2);
  }

  const std::string dir_a = (base / "a").string();
  const std::string dir_b = (base / "b").string();
  auto config_text = [](const std::string& dir) {
    return std::string(R"({
      "seed": 21,
      "output_dir": ")") + dir + R"(",
      "synth": {
        "n_train": 12, "n_calibrate": 10, "n_test": 10,
        "shape": [3, 3], "covariates": 2,
        "signal_ranks": [2, 2], "noise_ranks": [2, 2],
        "outlier_fraction": 0.2
      },
      "model": {
        "ranks_p": [2, 2], "ranks_q": [2, 2],
        "max_iterations": 40, "gradient_tolerance": 1e-4, "restarts": 1
      }
    })";
  };
  const std::string cfg_a = write_temp("tgpr_a.json", config_text(dir_a));
  const std::string cfg_b = write_temp("tgpr_b.json", config_text(dir_b));

  SUBCASE("synth is byte-identical across runs and directories") {
    REQUIRE(cli::run({"synth", "--config", cfg_a}) == 0);
    REQUIRE(cli::run({"synth", "--config", cfg_b}) == 0);
    for (const char* name : {"train_x.dtf", "train_y.dtf", "test_y.dtf", "labels.csv"})
      CHECK(slurp(dir_a + "/" + name) == slurp(dir_b + "/" + name));
    // run a second time into the same directory
    REQUIRE(cli::run({"synth", "--config", cfg_a}) == 0);
    CHECK(slurp(dir_a + "/train_y.dtf") == slurp(dir_b + "/train_y.dtf"));
  }

  SUBCASE("full pipeline: synth, fit, predict, score") {
    REQUIRE(cli::run({"synth", "--config", cfg_a}) == 0);
    REQUIRE(cli::run({"fit", "--config", cfg_a}) == 0);
    CHECK(fs::exists(dir_a + "/model.tgm"));
    CHECK(fs::exists(dir_a + "/trace.csv"));

    // model round trip preserves parameters exactly
    const FittedModel m = load_model(dir_a + "/model.tgm");
    save_model(dir_a + "/model2.tgm", m);
    CHECK(slurp(dir_a + "/model.tgm") == slurp(dir_a + "/model2.tgm"));

    // predictions for the test split, then deviations for calibration split
    REQUIRE(cli::run({"predict", "--config", cfg_a}) == 0);
    CHECK(fs::exists(dir_a + "/mean.dtf"));
    CHECK(fs::exists(dir_a + "/snpm.dtf"));

    // deviations for the calibration split via the paths section
    RunConfig cal = load_config(cfg_a);
    cal.paths["x_star"] = dir_a + "/calibrate_x.dtf";
    cal.paths["y_star"] = dir_a + "/calibrate_y.dtf";
    cal.paths["snpm"] = dir_a + "/snpm_cal.dtf";
    cal.paths["mean"] = dir_a + "/mean_cal.dtf";
    cal.paths["variance"] = dir_a + "/variance_cal.dtf";
    const std::string cfg_cal = write_temp("tgpr_cal.json", serialize_config(cal));
    REQUIRE(cli::run({"predict", "--config", cfg_cal}) == 0);

    REQUIRE(cli::run({"score", "--config", cfg_a}) == 0);
    const std::string scores = slurp(dir_a + "/scores.csv");
    CHECK(scores.find("subject_id,statistic,abnormality_prob,label") == 0);
  }

  SUBCASE("rank exceeding the data extent exits 2") {
    REQUIRE(cli::run({"synth", "--config", cfg_a}) == 0);
    RunConfig bad = load_config(cfg_a);
    bad.model.ranks_p = {9, 2};
    const std::string cfg_bad = write_temp("tgpr_bad.json", serialize_config(bad));
    CHECK(cli::run({"fit", "--config", cfg_bad}) == 2);
  }
}
