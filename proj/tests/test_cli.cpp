#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geofreq/config.hpp"
#include "geofreq/error.hpp"

namespace fs = std::filesystem;
using namespace geofreq;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Workdir {
  fs::path dir;
  explicit Workdir(const std::string& name) : dir(fs::temp_directory_path() / ("geofreq_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workdir() { fs::remove_all(dir); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(GEOFREQ_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kRun = R"([paths]
policies = out/synth_policies.csv
output = out

[synth]
n_zones = 60
beta = -2.04, 0.3
seed = 7

[features]
specs = base | base + lat_long

[model]
family = glm
grid = eta=0;alpha=0 | eta=0.1;alpha=1

[experiment]
seeds = 1, 2
)";

}  // namespace

TEST_CASE("configuration parsing") {
  std::istringstream in(kRun);
  const auto cfg = config::parse_config(in, "/base");
  CHECK(cfg.paths.policies == fs::path("/base/out/synth_policies.csv"));
  CHECK(cfg.zones_path() == fs::path("/base/out/zones.csv"));
  CHECK(cfg.synth.n_zones == 60);
  CHECK(cfg.synth.beta.size() == 2);
  CHECK(cfg.feature_specs.size() == 2);
  CHECK(cfg.feature_specs[1] == std::vector<std::string>{"base", "lat_long"});
  CHECK(cfg.grid.size() == 2);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(cfg.strat_bins == 10);

  std::ostringstream resolved;
  config::write_resolved(resolved, cfg);
  std::istringstream again(resolved.str());
  const auto back = config::parse_config(again, "/elsewhere");
  CHECK(back.paths.policies == cfg.paths.policies);
  CHECK(back.grid == cfg.grid);
  CHECK(back.feature_specs == cfg.feature_specs);
  CHECK(back.synth.beta == cfg.synth.beta);
  CHECK(back.radii == cfg.radii);
}

TEST_CASE("configuration errors") {
  for (const char* text : {"[paths]\nunknown = 1\n", "[nosuch]\na = 1\n", "[model]\nfamily = svm\n",
                           "[features]\nspecs = base + nothing\n", "[experiment]\nseeds = 1, x\n",
                           "[model]\ngrid = eta=-1;alpha=0\n", "[synth]\nn_zones = 3\n"}) {
    std::istringstream in(text);
    CHECK_THROWS_AS(config::parse_config(in), ConfigError);
  }
  CHECK_THROWS_AS(config::load_config("/nonexistent/run.ini"), ConfigError);
  CHECK_THROWS_AS(config::require_file("", "paths.policies"), ConfigError);
}

TEST_CASE("command line exit codes") {
  Workdir w("codes");
  CHECK(run("--help") == 0);
  CHECK(run("experiment --config /nonexistent.ini") == 2);
  CHECK(run("frobnicate") == 2);
  const auto bad = w.write("bad.ini", "[model]\nfamily = svm\n");
  CHECK(run("experiment --config " + bad.string()) == 2);
  const auto no_areas = w.write("cov.ini", "[paths]\noutput = out\n");
  CHECK(run("coverage --config " + no_areas.string()) == 2);
}

TEST_CASE("end to end run is reproducible across thread counts") {
  Workdir w("e2e");
  const auto ini = w.write("run.ini", kRun);
  const auto c = " --config " + ini.string();
  REQUIRE(run("synth" + c) == 0);
  REQUIRE(run("aggregate" + c) == 0);
  REQUIRE(run("experiment --jobs 1" + c) == 0);
  const auto one = slurp(w.dir / "out" / "cv_results.csv");
  const auto table = slurp(w.dir / "out" / "cv_table.txt");
  REQUIRE(run("experiment --jobs 4" + c) == 0);
  CHECK(slurp(w.dir / "out" / "cv_results.csv") == one);
  CHECK(slurp(w.dir / "out" / "cv_table.txt") == table);
  CHECK(table.find("base + lat_long") != std::string::npos);
  CHECK(fs::exists(w.dir / "out" / "model_reports.txt"));

  REQUIRE(run("robustness" + c) == 0);
  CHECK(fs::exists(w.dir / "out" / "robustness.csv"));

  std::istringstream resolved(slurp(w.dir / "out" / "experiment.resolved.ini"));
  const auto cfg = config::parse_config(resolved);
  CHECK(cfg.synth.n_zones == 60);
  CHECK(cfg.grid.size() == 2);

  REQUIRE(run("experiment --seed 3" + c) == 0);
  CHECK(slurp(w.dir / "out" / "cv_results.csv") != one);
}
