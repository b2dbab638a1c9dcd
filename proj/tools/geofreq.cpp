#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "geofreq/config.hpp"
#include "geofreq/error.hpp"
#include "geofreq/pipeline.hpp"

namespace {

using namespace geofreq;

constexpr int kComputationError = 1;
constexpr int kInputError = 2;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool strict = false;
  std::optional<int> jobs;
};

std::optional<int> jobs_from_env() {
  const char* v = std::getenv("GEOFREQ_JOBS");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw ConfigError(std::string("GEOFREQ_JOBS must be a non-negative integer: ") + v);
  return static_cast<int>(n);
}

config::RunConfig resolve(const Overrides& o) {
  config::RunConfig cfg;
  if (!o.config.empty()) cfg = config::load_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.synth.seed = *o.seed;
  }
  if (!o.out.empty()) cfg.paths.output = o.out;
  if (o.strict) cfg.strict = true;
  if (o.jobs) {
    cfg.jobs = *o.jobs;
  } else if (const auto env = jobs_from_env()) {
    cfg.jobs = *env;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zone-level claim-frequency modelling with geographic predictors"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config, "Configuration file (INI)");
  app.add_option("--seed", o.seed, "Seed for fold plans and synthetic data");
  app.add_option("--out", o.out, "Output directory");
  app.add_flag("--strict", o.strict, "Abort on the first malformed policy row");
  app.add_option("--jobs", o.jobs, "Worker threads (0 = all cores); falls back to GEOFREQ_JOBS")
      ->check(CLI::NonNegativeNumber);

  using Command = pipeline::Outputs (*)(const config::RunConfig&, std::ostream&);
  const std::pair<const char*, std::pair<const char*, Command>> commands[] = {
      {"aggregate", {"Aggregate policies to a zone table", pipeline::cmd_aggregate}},
      {"geo", {"Buffer features per radius", pipeline::cmd_geo}},
      {"experiment", {"Nested cross-validation per feature spec", pipeline::cmd_experiment}},
      {"robustness", {"Experiment repeated over several seeds", pipeline::cmd_robustness}},
      {"synth", {"Synthetic zones and policies", pipeline::cmd_synth}},
      {"coverage", {"Postcode coverage ratios", pipeline::cmd_coverage}},
  };
  Command selected = nullptr;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->callback([&selected, fn = entry.second] { selected = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  try {
    const auto cfg = resolve(o);
    const auto written = selected(cfg, std::cerr);
    for (const auto& p : written) std::cout << p.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kComputationError;
  }
}
