#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "geofreq/ingest.hpp"

namespace geofreq::zones {

/// Per-postcode summary of the policies living in it.
struct ZoneAggregate {
  std::string postcode;
  std::string postcode_2;
  double lat = 0.0;
  double lon = 0.0;
  std::size_t n_policies = 0;
  double expo_ag = 0.0;
  long long nclaims_ag = 0;
  double freq = 0.0;  // nclaims_ag / expo_ag; never used as a predictor
  std::vector<double> summaries;  // aligned with ZoneTable::summary_columns

  bool operator==(const ZoneAggregate&) const = default;
};

struct ZoneTable {
  /// Numeric summaries (sorted) followed by category shares (sorted).
  std::vector<std::string> summary_columns;
  /// Ascending postcode order.
  std::vector<ZoneAggregate> zones;

  std::optional<std::size_t> column(std::string_view name) const;
  std::vector<std::string> postcodes() const;
  const ZoneAggregate* find(std::string_view postcode) const;

  bool operator==(const ZoneTable&) const = default;
};

/// First two digits of a postcode. Throws FormatError on a non-digit prefix.
std::string derive_region_code(std::string_view postcode);

/// Summary column names in canonical order.
std::vector<std::string> summary_column_names();

/// Collapses policies to one row per postcode. Numeric summaries are the
/// unweighted mean, midpoint median and population SD; shares are level
/// counts over n_policies. Throws DataError if a zone's policies disagree on
/// the centroid by more than 1e-9 degrees.
ZoneTable aggregate_zones(const ingest::PolicyTable& table);

void write_zone_table(std::ostream& out, const ZoneTable& table);
ZoneTable read_zone_table(std::istream& in);

}  // namespace geofreq::zones
