#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "geofreq/csv.hpp"

namespace geofreq::ingest {

enum class Coverage { TPL, TPLPlus, TPLPlusPlus };
enum class Sex { Female, Male };
enum class Fuel { Gasoline, Diesel };
enum class Use { Private, Work };

/// One policy-year row of the portfolio.
struct PolicyRecord {
  double exposure = 1.0;  // fraction of the year, (0, 1]
  Coverage coverage = Coverage::TPL;
  double ageph = 0.0;
  Sex sex = Sex::Male;
  int bm = 0;  // bonus-malus level 0..22
  double power = 0.0;  // kW
  double agec = 0.0;
  Fuel fuel = Fuel::Gasoline;
  Use use = Use::Private;
  bool fleet = false;
  std::string postcode;
  double lat = 0.0;
  double lon = 0.0;
  int nclaims = 0;

  bool operator==(const PolicyRecord&) const = default;
};

using PolicyTable = std::vector<PolicyRecord>;

/// Returns a description of the first violated record invariant, if any.
std::optional<std::string> check_invariants(const PolicyRecord& r);

/// Numeric covariates summarised per zone (mean/median/sd).
struct NumericVar {
  std::string_view name;
  double (*value)(const PolicyRecord&);
};

/// Categorical covariates summarised per zone as level shares.
struct CategoricalVar {
  std::string_view name;
  std::vector<std::string_view> levels;  // label order used for columns
  std::size_t (*level)(const PolicyRecord&);
};

const std::vector<NumericVar>& numeric_vars();
const std::vector<CategoricalVar>& categorical_vars();

/// Logical field -> source column name. Keys: expo coverage ageph sex bm power
/// agec fuel use fleet postcode lat long nclaims.
struct Schema {
  std::map<std::string, std::string> columns;

  static Schema defaults();
  static const std::vector<std::string>& fields();
};

struct ParseOptions {
  csv::Dialect dialect;
  bool strict = false;  // abort on the first bad row instead of skipping it
};

struct RowIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  PolicyTable table;
  std::size_t rows_read = 0;
  std::size_t rows_missing_fields = 0;
  std::vector<RowIssue> issues;
};

/// Parses delimited text with a header row. Throws SchemaError when a mapped
/// column is absent and RowError on the first bad row in strict mode.
ParseResult parse_policies(std::istream& source, const Schema& schema = Schema::defaults(),
                           const ParseOptions& options = {});

/// Writes the table with default column names so parse_policies reads it back.
void write_policies(std::ostream& out, const PolicyTable& table, const csv::Dialect& dialect = {});

/// Keeps the records with nclaims <= max_claims, preserving order.
PolicyTable filter_max_claims(const PolicyTable& table, int max_claims);

std::string_view label(Coverage c);
std::string_view label(Sex s);
std::string_view label(Fuel f);
std::string_view label(Use u);

}  // namespace geofreq::ingest
