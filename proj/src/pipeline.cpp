#include "geofreq/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "geofreq/csv.hpp"
#include "geofreq/error.hpp"
#include "geofreq/eval.hpp"
#include "geofreq/geo/buffer.hpp"
#include "geofreq/geo/landcover.hpp"
#include "geofreq/geo/layers.hpp"
#include "geofreq/ingest.hpp"
#include "geofreq/synth.hpp"
#include "geofreq/zones.hpp"

namespace geofreq::pipeline {
namespace {

namespace fs = std::filesystem;

std::ifstream open_in(const fs::path& p, const std::string& setting) {
  config::require_file(p, setting);
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError(setting + ": cannot open " + p.string());
  return in;
}

/// Output files are written whole or not at all: a temporary sibling is
/// renamed into place once the writer returns.
template <class Fn>
fs::path write_file(const fs::path& dir, const std::string& name, Fn&& fn) {
  fs::create_directories(dir);
  const fs::path target = dir / name;
  const fs::path tmp = dir / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    fn(out);
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
  return target;
}

std::vector<double> radii_needed(const std::vector<std::vector<std::string>>& specs) {
  std::set<double> radii;
  for (const auto& spec : specs) {
    for (const auto& block : spec) {
      if (block == "osm_rALL") {
        radii.insert(geo::kBufferRadiiKm.begin(), geo::kBufferRadiiKm.end());
      } else if (block.starts_with("osm_")) {
        radii.insert(geo::parse_radius_label(block.substr(4)));
      }
    }
  }
  return {radii.begin(), radii.end()};
}

eval::ExperimentOptions experiment_options(const config::RunConfig& cfg, const std::vector<std::string>& spec) {
  eval::ExperimentOptions o;
  o.family = cfg.family;
  o.grid = cfg.grid;
  o.seed = cfg.seed;
  o.strat_bins = cfg.strat_bins;
  o.jobs = cfg.jobs;
  o.settings = cfg.fit;
  o.features_label = features::spec_label(spec);
  return o;
}

}  // namespace

fs::path write_resolved_config(const config::RunConfig& cfg, const std::string& command) {
  return write_file(cfg.paths.output, command + ".resolved.ini",
                    [&](std::ostream& out) { config::write_resolved(out, cfg); });
}

Outputs cmd_aggregate(const config::RunConfig& cfg, std::ostream& log) {
  auto in = open_in(cfg.paths.policies, "[paths] policies");
  ingest::ParseOptions options;
  options.dialect = cfg.dialect;
  options.strict = cfg.strict;
  auto parsed = ingest::parse_policies(in, cfg.schema, options);
  log << "rows read: " << parsed.rows_read << ", accepted: " << parsed.table.size()
      << ", rejected: " << parsed.issues.size() << " (missing fields: " << parsed.rows_missing_fields << ")\n";
  auto table = std::move(parsed.table);
  if (cfg.max_claims) {
    const auto before = table.size();
    table = ingest::filter_max_claims(table, *cfg.max_claims);
    log << "claim filter (nclaims <= " << *cfg.max_claims << "): kept " << table.size() << " of " << before << '\n';
  }
  const auto zones = zones::aggregate_zones(table);
  log << "zones: " << zones.zones.size() << '\n';

  Outputs out;
  out.push_back(write_file(cfg.paths.output, "zones.csv", [&](std::ostream& o) { zones::write_zone_table(o, zones); }));
  out.push_back(write_file(cfg.paths.output, "ingest_issues.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"line", "message"});
    for (const auto& issue : parsed.issues) w.row({std::to_string(issue.line), issue.message});
  }));
  out.push_back(write_resolved_config(cfg, "aggregate"));
  return out;
}

Outputs cmd_geo(const config::RunConfig& cfg, std::ostream& log) {
  auto zin = open_in(cfg.zones_path(), "[paths] zones");
  const auto zones = zones::read_zone_table(zin);

  geo::LayerSet layers;
  geo::GeoJsonOptions gj;
  gj.crs = cfg.layer_crs;
  gj.permissive = cfg.permissive;
  for (const auto& path : cfg.paths.layers) {
    auto in = open_in(path, "[paths] layers");
    const auto stats = geo::read_geojson(in, layers, gj);
    log << path.filename().string() << ": " << stats.features << " features, " << stats.skipped_untagged
        << " untagged, " << stats.skipped_geometry << " with unusable geometry\n";
  }
  geo::ensure_required_layers(layers);

  if (cfg.mask && !cfg.paths.landcover.empty()) {
    auto in = open_in(cfg.paths.landcover, "[paths] landcover");
    const auto grid = geo::read_esri_ascii(in);
    const auto keep = geo::artificial_surface_codes();
    for (auto& [tag, layer] : layers) {
      auto masked = geo::mask_by_landcover(layer, grid, keep);
      log << "mask " << tag << ": " << layer.size() << " -> " << masked.layer.size() << " (outside raster: "
          << masked.dropped_outside << ")\n";
      layer = std::move(masked.layer);
    }
  }

  geo::ProjectionOptions projection;
  projection.permissive = cfg.permissive;
  std::vector<geo::ProjectedPoint> centers;
  for (const auto& z : zones.zones) centers.push_back(geo::project_to_lambert72({z.lat, z.lon}, projection));
  const auto ids = zones.postcodes();
  const geo::IndexedLayers indexed(layers);

  Outputs out;
  for (double r : cfg.radii) {
    const auto vectors = geo::env_feature_table(centers, r, indexed);
    const std::string label = geo::radius_label(r);
    out.push_back(write_file(cfg.env_dir(), "env_" + label + ".csv",
                             [&](std::ostream& o) { features::write_env_table(o, ids, vectors, r); }));
    out.push_back(write_file(cfg.env_dir(), "env_totals_" + label + ".csv",
                             [&](std::ostream& o) { features::write_env_totals(o, ids, vectors, r); }));
  }
  out.push_back(write_resolved_config(cfg, "geo"));
  return out;
}

Inputs load_inputs(const config::RunConfig& cfg) {
  Inputs inputs;
  auto zin = open_in(cfg.zones_path(), "[paths] zones");
  inputs.zones = zones::read_zone_table(zin);
  for (double r : radii_needed(cfg.feature_specs)) {
    auto in = open_in(cfg.env_dir() / ("env_" + geo::radius_label(r) + ".csv"), "env features (run geo first)");
    inputs.sources.env[r] = features::read_env_table(in);
  }
  for (const auto& [label, src] : cfg.embeddings) {
    auto in = open_in(src.path, "[embeddings] " + label);
    inputs.sources.embeddings[label] = features::load_embeddings(in, src.dimension, label, cfg.dialect.delimiter);
  }
  return inputs;
}

Outputs cmd_experiment(const config::RunConfig& cfg, std::ostream& log) {
  const auto inputs = load_inputs(cfg);
  std::vector<eval::CvResult> results;
  for (const auto& spec : cfg.feature_specs) {
    const auto m = features::assemble(inputs.zones, spec, inputs.sources);
    results.push_back(eval::run_experiment(m, experiment_options(cfg, spec)));
    log << eval::family_label(cfg.family) << " " << results.back().features << ": mean RMSE "
        << csv::format_double(results.back().mean) << ", sd " << csv::format_double(results.back().sd) << '\n';
  }
  Outputs out;
  out.push_back(write_file(cfg.paths.output, "cv_results.csv", [&](std::ostream& o) {
    for (std::size_t i = 0; i < results.size(); ++i) eval::write_cv_result(o, results[i], ',', i == 0);
  }));
  out.push_back(write_file(cfg.paths.output, "cv_table.txt", [&](std::ostream& o) { eval::write_cv_table(o, results); }));
  out.push_back(write_file(cfg.paths.output, "model_reports.txt", [&](std::ostream& o) {
    for (const auto& r : results) {
      o << "=== " << eval::family_label(r.family) << " | " << r.features << " ===\n";
      eval::write_fold_reports(o, r);
    }
  }));
  out.push_back(write_resolved_config(cfg, "experiment"));
  return out;
}

Outputs cmd_robustness(const config::RunConfig& cfg, std::ostream& log) {
  const auto inputs = load_inputs(cfg);
  std::vector<eval::RobustnessReport> reports;
  for (const auto& spec : cfg.feature_specs) {
    const auto m = features::assemble(inputs.zones, spec, inputs.sources);
    reports.push_back(eval::robustness_suite(m, experiment_options(cfg, spec), cfg.seeds));
    log << features::spec_label(spec) << ": avg fold-mean " << csv::format_double(reports.back().avg_mean)
        << ", avg fold-sd " << csv::format_double(reports.back().avg_sd) << '\n';
  }
  Outputs out;
  out.push_back(write_file(cfg.paths.output, "robustness.csv", [&](std::ostream& o) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::ostringstream block;
      eval::write_robustness(block, reports[i]);
      std::string text = block.str();
      if (i > 0) text.erase(0, text.find('\n') + 1);  // one header for the file
      o << text;
    }
  }));
  out.push_back(write_file(cfg.paths.output, "robustness_table.txt", [&](std::ostream& o) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      if (i) o << '\n';
      eval::write_robustness_table(o, reports[i]);
    }
  }));
  out.push_back(write_resolved_config(cfg, "robustness"));
  return out;
}

Outputs cmd_synth(const config::RunConfig& cfg, std::ostream& log) {
  const auto data = synth::generate_zones(cfg.synth);
  const auto policies = synth::generate_policies(data, cfg.synth.seed);
  log << "synthetic zones: " << data.zones.zones.size() << ", policies: " << policies.size() << '\n';
  Outputs out;
  out.push_back(write_file(cfg.paths.output, "synth_zones.csv",
                           [&](std::ostream& o) { zones::write_zone_table(o, data.zones); }));
  out.push_back(write_file(cfg.paths.output, "synth_policies.csv",
                           [&](std::ostream& o) { ingest::write_policies(o, policies); }));
  out.push_back(write_file(cfg.paths.output, "synth_beta.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"term", "beta"});
    w.row({"Intercept", csv::format_double(data.beta(0))});
    for (Eigen::Index j = 1; j < data.beta.size(); ++j) {
      w.row({data.matrix.columns[static_cast<std::size_t>(j - 1)], csv::format_double(data.beta(j))});
    }
  }));
  out.push_back(write_resolved_config(cfg, "synth"));
  return out;
}

Outputs cmd_coverage(const config::RunConfig& cfg, std::ostream& log) {
  auto in = open_in(cfg.paths.postcode_areas, "[paths] postcode_areas");
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) throw FormatError("postcode area file is empty");
  const auto header = csv::split(line, cfg.dialect.delimiter);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("postcode area file lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto pc_col = column("postcode");
  const auto area_col = column("area_km2");

  std::vector<geo::Neighborhood> hoods;
  std::vector<std::string> names;
  for (double r : cfg.coverage.disc_radii_km) {
    hoods.push_back({geo::Neighborhood::Shape::Disc, r});
    names.push_back("disc_r" + csv::format_double(r));
  }
  for (double a : cfg.coverage.square_apothems_km) {
    hoods.push_back({geo::Neighborhood::Shape::Square, a});
    names.push_back("square_side" + csv::format_double(2.0 * a));
  }

  std::vector<std::pair<std::string, double>> areas;
  while (csv::next_line(in, line, line_no)) {
    const auto fields = csv::split(line, cfg.dialect.delimiter);
    if (fields.size() != header.size()) throw RowError(line_no, "expected " + std::to_string(header.size()) + " fields");
    const auto area = csv::parse_double(fields[area_col], cfg.dialect.decimal);
    if (!area || !(*area > 0.0)) throw RowError(line_no, "area_km2 must be a positive number");
    areas.emplace_back(fields[pc_col], *area);
  }
  if (areas.empty()) throw DataError("postcode area file has no rows");
  std::sort(areas.begin(), areas.end());

  std::vector<double> sums(hoods.size(), 0.0);
  Outputs out;
  out.push_back(write_file(cfg.paths.output, "coverage.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    std::vector<std::string> head{"postcode", "area_km2"};
    head.insert(head.end(), names.begin(), names.end());
    w.row(head);
    for (const auto& [pc, area] : areas) {
      std::vector<std::string> row{pc, csv::format_double(area)};
      for (std::size_t k = 0; k < hoods.size(); ++k) {
        const double ratio = geo::coverage_ratio(hoods[k], area);
        sums[k] += ratio;
        row.push_back(csv::format_double(ratio));
      }
      w.row(row);
    }
  }));
  out.push_back(write_file(cfg.paths.output, "coverage_summary.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"neighborhood", "shape", "size_km", "area_km2", "mean_ratio"});
    for (std::size_t k = 0; k < hoods.size(); ++k) {
      const bool disc = hoods[k].shape == geo::Neighborhood::Shape::Disc;
      w.row({names[k], disc ? "disc" : "square", csv::format_double(disc ? hoods[k].size_km : 2.0 * hoods[k].size_km),
             csv::format_double(hoods[k].area_km2()), csv::format_double(sums[k] / static_cast<double>(areas.size()))});
      log << names[k] << ": mean coverage " << csv::format_double(100.0 * sums[k] / static_cast<double>(areas.size()))
          << "%\n";
    }
  }));
  out.push_back(write_resolved_config(cfg, "coverage"));
  return out;
}

}  // namespace geofreq::pipeline
