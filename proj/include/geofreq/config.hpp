#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "geofreq/csv.hpp"
#include "geofreq/eval.hpp"
#include "geofreq/geo/layers.hpp"
#include "geofreq/ingest.hpp"
#include "geofreq/synth.hpp"

namespace geofreq::config {

struct Paths {
  std::filesystem::path policies;
  std::filesystem::path zones;  // zone table; defaults to <output>/zones.csv
  std::vector<std::filesystem::path> layers;
  std::filesystem::path landcover;
  std::filesystem::path postcode_areas;
  std::filesystem::path env_dir;  // defaults to the output directory
  std::filesystem::path output = "out";
};

struct EmbeddingSource {
  std::filesystem::path path;
  std::size_t dimension = 0;
};

struct CoverageSettings {
  std::vector<double> disc_radii_km{0.5, 1.0, 3.0, 5.0};
  std::vector<double> square_apothems_km{0.25, 0.5, 1.5};
};

struct RunConfig {
  Paths paths;
  ingest::Schema schema = ingest::Schema::defaults();
  csv::Dialect dialect;
  bool strict = false;
  std::optional<int> max_claims = 3;

  std::vector<double> radii{0.5, 1.0, 3.0, 5.0};
  geo::InputCrs layer_crs = geo::InputCrs::Wgs84;
  bool permissive = false;
  bool mask = true;  // apply land-cover masking when a grid is given

  /// Each entry is one feature specification (list of block names).
  std::vector<std::vector<std::string>> feature_specs{{"base"}};
  std::map<std::string, EmbeddingSource> embeddings;

  eval::Family family = eval::Family::Glm;
  std::vector<eval::HyperParams> grid;  // empty means the default grid
  eval::FitSettings fit;

  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int strat_bins = 10;
  int jobs = 0;

  synth::SynthConfig synth;
  CoverageSettings coverage;

  std::filesystem::path zones_path() const;
  std::filesystem::path env_dir() const;
};

/// Parses key = value lines grouped in [sections]. Relative paths resolve
/// against base_dir. Throws ConfigError on unknown keys or bad values.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& file);

/// Every setting after defaults and overrides, in the same format.
void write_resolved(std::ostream& out, const RunConfig& cfg);

/// Throws ConfigError naming the setting when the path is empty or missing.
void require_file(const std::filesystem::path& p, const std::string& setting);

}  // namespace geofreq::config
