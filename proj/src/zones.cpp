#include "geofreq/zones.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>

#include "geofreq/csv.hpp"
#include "geofreq/error.hpp"
#include "geofreq/numeric.hpp"

namespace geofreq::zones {
namespace {

const std::vector<std::string> kIdColumns{"postcode", "postcode_2", "lat",        "long",
                                          "n_policies", "expo_ag",  "nclaims_ag", "freq"};

struct SummaryPlan {
  // For each output column: numeric var index + stat, or categorical var + level.
  enum class Kind { Mean, Median, Sd, Share };
  struct Column {
    std::string name;
    Kind kind;
    std::size_t var;
    std::size_t level;
  };
  std::vector<Column> columns;
};

const SummaryPlan& plan() {
  static const SummaryPlan p = [] {
    SummaryPlan out;
    std::vector<SummaryPlan::Column> numeric;
    const auto& nv = ingest::numeric_vars();
    for (std::size_t v = 0; v < nv.size(); ++v) {
      const std::string n(nv[v].name);
      numeric.push_back({n + "_mean", SummaryPlan::Kind::Mean, v, 0});
      numeric.push_back({n + "_median", SummaryPlan::Kind::Median, v, 0});
      numeric.push_back({n + "_sd", SummaryPlan::Kind::Sd, v, 0});
    }
    std::vector<SummaryPlan::Column> shares;
    const auto& cv = ingest::categorical_vars();
    for (std::size_t v = 0; v < cv.size(); ++v) {
      for (std::size_t l = 0; l < cv[v].levels.size(); ++l) {
        shares.push_back({std::string(cv[v].name) + "_" + std::string(cv[v].levels[l]) + "_prop",
                          SummaryPlan::Kind::Share, v, l});
      }
    }
    auto by_name = [](const auto& a, const auto& b) { return a.name < b.name; };
    std::sort(numeric.begin(), numeric.end(), by_name);
    std::sort(shares.begin(), shares.end(), by_name);
    out.columns = std::move(numeric);
    out.columns.insert(out.columns.end(), shares.begin(), shares.end());
    return out;
  }();
  return p;
}

double median_of(std::vector<double> v) {
  const auto n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return lower + (upper - lower) / 2.0;
}

ZoneAggregate summarise(const std::string& postcode, const ingest::PolicyTable& table,
                        const std::vector<std::size_t>& rows) {
  const auto& first = table[rows.front()];
  ZoneAggregate z;
  z.postcode = postcode;
  z.postcode_2 = derive_region_code(postcode);
  z.lat = first.lat;
  z.lon = first.lon;
  z.n_policies = rows.size();

  CompensatedSum expo;
  for (auto i : rows) {
    const auto& r = table[i];
    if (std::abs(r.lat - first.lat) > 1e-9 || std::abs(r.lon - first.lon) > 1e-9) {
      throw DataError("zone " + postcode + ": policies disagree on centroid coordinates");
    }
    expo.add(r.exposure);
    z.nclaims_ag += r.nclaims;
  }
  z.expo_ag = expo.value();
  z.freq = static_cast<double>(z.nclaims_ag) / z.expo_ag;

  const auto n = static_cast<double>(rows.size());
  const auto& nv = ingest::numeric_vars();
  const auto& cv = ingest::categorical_vars();
  std::vector<std::vector<double>> values(nv.size());
  for (std::size_t v = 0; v < nv.size(); ++v) {
    values[v].reserve(rows.size());
    for (auto i : rows) values[v].push_back(nv[v].value(table[i]));
  }

  for (const auto& col : plan().columns) {
    double out = 0.0;
    switch (col.kind) {
      case SummaryPlan::Kind::Mean:
        out = compensated_sum(values[col.var]) / n;
        break;
      case SummaryPlan::Kind::Median:
        out = median_of(values[col.var]);
        break;
      case SummaryPlan::Kind::Sd: {
        const double mean = compensated_sum(values[col.var]) / n;
        CompensatedSum ss;
        for (double x : values[col.var]) ss.add((x - mean) * (x - mean));
        out = std::sqrt(ss.value() / n);
        break;
      }
      case SummaryPlan::Kind::Share: {
        std::size_t count = 0;
        for (auto i : rows) count += cv[col.var].level(table[i]) == col.level ? 1 : 0;
        out = static_cast<double>(count) / n;
        break;
      }
    }
    z.summaries.push_back(out);
  }
  return z;
}

}  // namespace

std::optional<std::size_t> ZoneTable::column(std::string_view name) const {
  const auto it = std::find(summary_columns.begin(), summary_columns.end(), name);
  if (it == summary_columns.end()) return std::nullopt;
  return static_cast<std::size_t>(it - summary_columns.begin());
}

std::vector<std::string> ZoneTable::postcodes() const {
  std::vector<std::string> ids;
  ids.reserve(zones.size());
  for (const auto& z : zones) ids.push_back(z.postcode);
  return ids;
}

const ZoneAggregate* ZoneTable::find(std::string_view postcode) const {
  const auto it = std::lower_bound(zones.begin(), zones.end(), postcode,
                                   [](const ZoneAggregate& z, std::string_view p) { return z.postcode < p; });
  if (it == zones.end() || it->postcode != postcode) return nullptr;
  return &*it;
}

std::string derive_region_code(std::string_view postcode) {
  if (postcode.size() < 2 || !std::isdigit(static_cast<unsigned char>(postcode[0])) ||
      !std::isdigit(static_cast<unsigned char>(postcode[1]))) {
    throw FormatError("postcode '" + std::string(postcode) + "' lacks a two-digit prefix");
  }
  return std::string(postcode.substr(0, 2));
}

std::vector<std::string> summary_column_names() {
  std::vector<std::string> names;
  for (const auto& c : plan().columns) names.push_back(c.name);
  return names;
}

ZoneTable aggregate_zones(const ingest::PolicyTable& table) {
  if (table.empty()) throw DataError("cannot aggregate an empty policy table");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < table.size(); ++i) groups[table[i].postcode].push_back(i);

  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> order;
  order.reserve(groups.size());
  for (const auto& g : groups) order.push_back(&g);

  ZoneTable out;
  out.summary_columns = summary_column_names();
  out.zones.resize(order.size());
  std::vector<std::exception_ptr> failures(order.size());
  const auto n_zones = static_cast<std::ptrdiff_t>(order.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n_zones; ++k) {
    try {
      out.zones[k] = summarise(order[k]->first, table, order[k]->second);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

void write_zone_table(std::ostream& out, const ZoneTable& table) {
  csv::Writer w(out);
  auto header = kIdColumns;
  header.insert(header.end(), table.summary_columns.begin(), table.summary_columns.end());
  w.row(header);
  for (const auto& z : table.zones) {
    std::vector<std::string> row{z.postcode,
                                 z.postcode_2,
                                 csv::format_double(z.lat),
                                 csv::format_double(z.lon),
                                 std::to_string(z.n_policies),
                                 csv::format_double(z.expo_ag),
                                 std::to_string(z.nclaims_ag),
                                 csv::format_double(z.freq)};
    for (double v : z.summaries) row.push_back(csv::format_double(v));
    w.row(row);
  }
}

ZoneTable read_zone_table(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) throw SchemaError("zone table: missing header");
  const auto header = csv::split(line, ',');
  if (header.size() < kIdColumns.size() ||
      !std::equal(kIdColumns.begin(), kIdColumns.end(), header.begin())) {
    throw SchemaError("zone table: header must start with the id columns");
  }
  ZoneTable t;
  t.summary_columns.assign(header.begin() + static_cast<std::ptrdiff_t>(kIdColumns.size()), header.end());
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line, ',');
    if (f.size() != header.size()) throw RowError(line_no, "zone table: wrong field count");
    auto real = [&](std::size_t i) {
      const auto v = csv::parse_double(f[i]);
      if (!v) throw RowError(line_no, "zone table: bad number '" + f[i] + "'");
      return *v;
    };
    auto integer = [&](std::size_t i) {
      const auto v = csv::parse_int(f[i]);
      if (!v || *v < 0) throw RowError(line_no, "zone table: bad count '" + f[i] + "'");
      return *v;
    };
    ZoneAggregate z;
    z.postcode = f[0];
    z.postcode_2 = f[1];
    z.lat = real(2);
    z.lon = real(3);
    z.n_policies = static_cast<std::size_t>(integer(4));
    z.expo_ag = real(5);
    z.nclaims_ag = integer(6);
    z.freq = real(7);
    if (!(z.expo_ag > 0.0)) throw RowError(line_no, "zone table: expo_ag must be positive");
    for (std::size_t i = kIdColumns.size(); i < f.size(); ++i) z.summaries.push_back(real(i));
    t.zones.push_back(std::move(z));
  }
  std::sort(t.zones.begin(), t.zones.end(),
            [](const ZoneAggregate& a, const ZoneAggregate& b) { return a.postcode < b.postcode; });
  for (std::size_t i = 1; i < t.zones.size(); ++i) {
    if (t.zones[i].postcode == t.zones[i - 1].postcode) {
      throw DataError("zone table: duplicate postcode " + t.zones[i].postcode);
    }
  }
  return t;
}

}  // namespace geofreq::zones
