#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "geofreq/config.hpp"
#include "geofreq/features.hpp"

namespace geofreq::pipeline {

/// Files written by a command, in the order they were written.
using Outputs = std::vector<std::filesystem::path>;

/// Parse, filter and aggregate the policy file into <output>/zones.csv. Row
/// issues go to <output>/ingest_issues.csv and a summary to `log`.
Outputs cmd_aggregate(const config::RunConfig& cfg, std::ostream& log);

/// Buffer features per configured radius: env_r<r>.csv (densities and
/// flags) and env_totals_r<r>.csv (raw counts and km).
Outputs cmd_geo(const config::RunConfig& cfg, std::ostream& log);

/// Nested cross-validation for every feature spec: cv_results.csv,
/// cv_table.txt and model_reports.txt.
Outputs cmd_experiment(const config::RunConfig& cfg, std::ostream& log);

/// The experiment repeated over the configured seeds: robustness.csv and
/// robustness_table.txt.
Outputs cmd_robustness(const config::RunConfig& cfg, std::ostream& log);

/// Synthetic zones, policies and the true coefficients.
Outputs cmd_synth(const config::RunConfig& cfg, std::ostream& log);

/// Coverage ratios per postcode and their averages.
Outputs cmd_coverage(const config::RunConfig& cfg, std::ostream& log);

/// Zone table plus every env and embedding block the specs need.
struct Inputs {
  zones::ZoneTable zones;
  features::BlockSources sources;
};
Inputs load_inputs(const config::RunConfig& cfg);

/// Writes <output>/<command>.resolved.ini.
std::filesystem::path write_resolved_config(const config::RunConfig& cfg, const std::string& command);

}  // namespace geofreq::pipeline
