#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "geofreq/geo/buffer.hpp"
#include "geofreq/zones.hpp"

namespace geofreq::features {

/// Zone-level design matrix. The offset ln(exposure) is carried separately and
/// is never a predictor column.
struct FeatureMatrix {
  std::vector<std::string> zone_ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;    // zones x columns
  Eigen::VectorXd exposure;  // expo_ag, > 0
  Eigen::VectorXd target;    // nclaims_ag

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  Eigen::VectorXd offset() const { return exposure.array().log().matrix(); }

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

  /// Throws DataError when an invariant (finite values, unique names,
  /// aligned rows, positive exposure) does not hold.
  void validate() const;
};

/// Per-column training statistics (population SD).
struct StandardizationParams {
  std::vector<std::string> columns;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  std::vector<bool> constant;  // passed through unscaled
};

StandardizationParams fit_standardization(const FeatureMatrix& m);
FeatureMatrix standardize_apply(const FeatureMatrix& m, const StandardizationParams& params);
std::pair<FeatureMatrix, StandardizationParams> standardize_fit(const FeatureMatrix& m);
FeatureMatrix unstandardize(const FeatureMatrix& m, const StandardizationParams& params);

/// Precomputed image embeddings keyed by zone id.
struct EmbeddingBlock {
  std::string label;
  std::size_t dimension = 0;
  std::map<std::string, std::vector<double>> vectors;
};

/// Rows are a zone id followed by expected_dim numbers; an optional header
/// row is skipped. Throws FormatError on a dimension mismatch and DataError on
/// a duplicate zone id.
EmbeddingBlock load_embeddings(std::istream& in, std::size_t expected_dim, std::string label,
                               char delimiter = ',');

/// Per-zone buffer features at one radius, as written by write_env_table.
struct EnvTable {
  double radius_km = 0.0;
  std::map<std::string, std::array<double, geo::EnvFeatureVector::kFields>> rows;
};

/// Column names "postcode" then each metric with its radius suffix.
void write_env_table(std::ostream& out, std::span<const std::string> zone_ids,
                     std::span<const geo::EnvFeatureVector> vectors, double radius_km);
void write_env_totals(std::ostream& out, std::span<const std::string> zone_ids,
                      std::span<const geo::EnvFeatureVector> vectors, double radius_km);
EnvTable read_env_table(std::istream& in);

struct BlockSources {
  std::map<double, EnvTable> env;  // keyed by radius in km
  std::map<std::string, EmbeddingBlock> embeddings;
};

/// Names accepted by assemble: base, lat_long, postcode_2, osm_r0.5, osm_r1,
/// osm_r3, osm_r5, osm_rALL, embeddings (every loaded block) and emb:<label>.
bool is_block_name(const std::string& name);

/// "base + lat_long + osm_r5"
std::string spec_label(const std::vector<std::string>& blocks);

/// Concatenates the selected blocks in the given order. Throws ConfigError on
/// an unknown block or a missing source, DataError when a zone lacks a row in
/// some block.
FeatureMatrix assemble(const zones::ZoneTable& zones, const std::vector<std::string>& blocks,
                       const BlockSources& sources = {});

}  // namespace geofreq::features
