#include "geofreq/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "geofreq/csv.hpp"
#include "geofreq/error.hpp"
#include "geofreq/numeric.hpp"

namespace geofreq::features {

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out;
  out.columns = columns;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), cols());
  out.exposure.resize(static_cast<Eigen::Index>(rows.size()));
  out.target.resize(static_cast<Eigen::Index>(rows.size()));
  out.zone_ids.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(rows[k]);
    const auto r = static_cast<Eigen::Index>(k);
    out.zone_ids.push_back(zone_ids.at(rows[k]));
    out.values.row(r) = values.row(i);
    out.exposure(r) = exposure(i);
    out.target(r) = target(i);
  }
  return out;
}

void FeatureMatrix::validate() const {
  const auto n = static_cast<Eigen::Index>(zone_ids.size());
  if (values.rows() != n || exposure.size() != n || target.size() != n) {
    throw DataError("feature matrix: rows do not align");
  }
  if (values.cols() != static_cast<Eigen::Index>(columns.size())) {
    throw DataError("feature matrix: column names do not match values");
  }
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (!seen.insert(c).second) throw DataError("feature matrix: duplicate column " + c);
  }
  if (!values.allFinite() || !target.allFinite()) throw DataError("feature matrix: non-finite value");
  if (n > 0 && !(exposure.array() > 0.0).all()) throw DataError("feature matrix: exposure must be positive");
  if (!exposure.allFinite()) throw DataError("feature matrix: non-finite exposure");
}

StandardizationParams fit_standardization(const FeatureMatrix& m) {
  StandardizationParams p;
  p.columns = m.columns;
  const auto n = m.rows();
  p.mean.resize(m.cols());
  p.sd.resize(m.cols());
  p.constant.assign(static_cast<std::size_t>(m.cols()), false);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    CompensatedSum s;
    for (Eigen::Index i = 0; i < n; ++i) s.add(m.values(i, j));
    const double mean = n > 0 ? s.value() / static_cast<double>(n) : 0.0;
    CompensatedSum ss;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = m.values(i, j) - mean;
      ss.add(d * d);
    }
    const double sd = n > 0 ? std::sqrt(ss.value() / static_cast<double>(n)) : 0.0;
    p.mean(j) = mean;
    p.sd(j) = sd;
    p.constant[static_cast<std::size_t>(j)] = sd <= 1e-12 * std::max(1.0, std::abs(mean));
  }
  return p;
}

FeatureMatrix standardize_apply(const FeatureMatrix& m, const StandardizationParams& params) {
  if (m.columns != params.columns) throw DataError("standardization: column schema mismatch");
  FeatureMatrix out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (params.constant[static_cast<std::size_t>(j)]) continue;
    out.values.col(j) = ((m.values.col(j).array() - params.mean(j)) / params.sd(j)).matrix();
  }
  return out;
}

std::pair<FeatureMatrix, StandardizationParams> standardize_fit(const FeatureMatrix& m) {
  auto params = fit_standardization(m);
  auto out = standardize_apply(m, params);
  return {std::move(out), std::move(params)};
}

FeatureMatrix unstandardize(const FeatureMatrix& m, const StandardizationParams& params) {
  if (m.columns != params.columns) throw DataError("standardization: column schema mismatch");
  FeatureMatrix out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (params.constant[static_cast<std::size_t>(j)]) continue;
    out.values.col(j) = (m.values.col(j).array() * params.sd(j) + params.mean(j)).matrix();
  }
  return out;
}

EmbeddingBlock load_embeddings(std::istream& in, std::size_t expected_dim, std::string label, char delimiter) {
  if (expected_dim == 0) throw DomainError("embedding dimension must be positive");
  EmbeddingBlock block;
  block.label = std::move(label);
  block.dimension = expected_dim;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line, delimiter);
    if (first && f.size() > 1 && !csv::parse_double(f[1])) {
      first = false;  // header row
      continue;
    }
    first = false;
    if (f.size() != expected_dim + 1) {
      throw FormatError("embeddings line " + std::to_string(line_no) + ": expected " +
                        std::to_string(expected_dim) + " values, found " + std::to_string(f.size() - 1));
    }
    std::vector<double> v;
    v.reserve(expected_dim);
    for (std::size_t k = 1; k < f.size(); ++k) {
      const auto x = csv::parse_double(f[k]);
      if (!x) throw FormatError("embeddings line " + std::to_string(line_no) + ": bad number '" + f[k] + "'");
      v.push_back(*x);
    }
    const auto id = csv::trim(f[0]);
    if (!block.vectors.emplace(id, std::move(v)).second) {
      throw DataError("embeddings line " + std::to_string(line_no) + ": duplicate zone id " + id);
    }
  }
  return block;
}

namespace {

std::vector<std::string> suffixed(const auto& names, const std::string& suffix) {
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(std::string(n) + "_" + suffix);
  return out;
}

}  // namespace

void write_env_table(std::ostream& out, std::span<const std::string> zone_ids,
                     std::span<const geo::EnvFeatureVector> vectors, double radius_km) {
  if (zone_ids.size() != vectors.size()) throw DataError("env table: ids and vectors differ in length");
  csv::Writer w(out);
  auto header = suffixed(geo::EnvFeatureVector::names(), geo::radius_label(radius_km));
  header.insert(header.begin(), "postcode");
  w.row(header);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    std::vector<std::string> row{zone_ids[i]};
    for (double v : vectors[i].values()) row.push_back(csv::format_double(v));
    w.row(row);
  }
}

void write_env_totals(std::ostream& out, std::span<const std::string> zone_ids,
                      std::span<const geo::EnvFeatureVector> vectors, double radius_km) {
  if (zone_ids.size() != vectors.size()) throw DataError("env table: ids and vectors differ in length");
  csv::Writer w(out);
  auto header = suffixed(geo::EnvFeatureVector::total_names(), geo::radius_label(radius_km));
  header.insert(header.begin(), "postcode");
  w.row(header);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    std::vector<std::string> row{zone_ids[i]};
    for (double v : vectors[i].totals()) row.push_back(csv::format_double(v));
    w.row(row);
  }
}

EnvTable read_env_table(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) throw SchemaError("env table: missing header");
  const auto header = csv::split(line, ',');
  constexpr auto kFields = geo::EnvFeatureVector::kFields;
  if (header.size() != kFields + 1 || header[0] != "postcode") {
    throw SchemaError("env table: expected postcode + " + std::to_string(kFields) + " metric columns");
  }
  const auto us = header[1].rfind('_');
  if (us == std::string::npos) throw SchemaError("env table: metric column lacks a radius suffix");
  const auto label = header[1].substr(us + 1);
  EnvTable t;
  t.radius_km = geo::parse_radius_label(label);
  const auto expected = suffixed(geo::EnvFeatureVector::names(), label);
  if (!std::equal(expected.begin(), expected.end(), header.begin() + 1)) {
    throw SchemaError("env table: unexpected metric columns");
  }
  while (csv::next_line(in, line, line_no)) {
    const auto f = csv::split(line, ',');
    if (f.size() != header.size()) throw RowError(line_no, "env table: wrong field count");
    std::array<double, kFields> row{};
    for (std::size_t k = 0; k < kFields; ++k) {
      const auto v = csv::parse_double(f[k + 1]);
      if (!v) throw RowError(line_no, "env table: bad number '" + f[k + 1] + "'");
      row[k] = *v;
    }
    if (!t.rows.emplace(f[0], row).second) throw DataError("env table: duplicate postcode " + f[0]);
  }
  return t;
}

bool is_block_name(const std::string& name) {
  static const std::set<std::string> fixed{"base",   "lat_long", "postcode_2", "osm_r0.5", "osm_r1",
                                           "osm_r3", "osm_r5",   "osm_rALL",   "embeddings"};
  return fixed.contains(name) || (name.rfind("emb:", 0) == 0 && name.size() > 4);
}

std::string spec_label(const std::vector<std::string>& blocks) {
  std::string out;
  for (const auto& b : blocks) out += (out.empty() ? "" : " + ") + b;
  return out;
}

namespace {

struct Builder {
  const zones::ZoneTable& zones;
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  void add(std::string name, std::vector<double> col) {
    names.push_back(std::move(name));
    cols.push_back(std::move(col));
  }
};

/// Share columns of one categorical variable always sum to one; the
/// alphabetically first of each group is dropped to avoid aliasing the
/// intercept.
std::set<std::string> redundant_share_columns(const zones::ZoneTable& z) {
  std::set<std::string> drop;
  for (const auto& var : ingest::categorical_vars()) {
    const std::string prefix = std::string(var.name) + "_";
    std::vector<std::string> present;
    for (const auto& level : var.levels) {
      const auto col = prefix + std::string(level) + "_prop";
      if (z.column(col)) present.push_back(col);
    }
    if (present.size() == var.levels.size() && !present.empty()) {
      drop.insert(*std::min_element(present.begin(), present.end()));
    }
  }
  return drop;
}

void add_env(Builder& b, const EnvTable& t) {
  const auto label = geo::radius_label(t.radius_km);
  const auto& names = geo::EnvFeatureVector::names();
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::vector<double> col;
    col.reserve(b.zones.zones.size());
    for (const auto& z : b.zones.zones) {
      const auto it = t.rows.find(z.postcode);
      if (it == t.rows.end()) throw DataError("env block " + label + ": no row for zone " + z.postcode);
      col.push_back(it->second[k]);
    }
    b.add(std::string(names[k]) + "_" + label, std::move(col));
  }
}

void add_embedding(Builder& b, const EmbeddingBlock& e) {
  for (std::size_t k = 0; k < e.dimension; ++k) {
    std::vector<double> col;
    col.reserve(b.zones.zones.size());
    for (const auto& z : b.zones.zones) {
      const auto it = e.vectors.find(z.postcode);
      if (it == e.vectors.end()) throw DataError("embedding " + e.label + ": no vector for zone " + z.postcode);
      col.push_back(it->second[k]);
    }
    b.add(e.label + "_emb_" + std::to_string(k), std::move(col));
  }
}

}  // namespace

FeatureMatrix assemble(const zones::ZoneTable& zones, const std::vector<std::string>& blocks,
                       const BlockSources& sources) {
  Builder b{zones, {}, {}};
  const auto n = zones.zones.size();
  for (const auto& block : blocks) {
    if (!is_block_name(block)) throw ConfigError("unknown feature block '" + block + "'");
    if (block == "base") {
      const auto drop = redundant_share_columns(zones);
      for (std::size_t j = 0; j < zones.summary_columns.size(); ++j) {
        if (drop.contains(zones.summary_columns[j])) continue;
        std::vector<double> col;
        col.reserve(n);
        for (const auto& z : zones.zones) col.push_back(z.summaries[j]);
        b.add(zones.summary_columns[j], std::move(col));
      }
    } else if (block == "lat_long") {
      std::vector<double> lat, lon;
      for (const auto& z : zones.zones) {
        lat.push_back(z.lat);
        lon.push_back(z.lon);
      }
      b.add("lat", std::move(lat));
      b.add("long", std::move(lon));
    } else if (block == "postcode_2") {
      std::set<std::string> levels;
      for (const auto& z : zones.zones) levels.insert(z.postcode_2);
      // drop-first encoding: the lexicographically smallest level is the reference
      for (auto it = levels.begin(); it != levels.end(); ++it) {
        if (it == levels.begin()) continue;
        std::vector<double> col;
        for (const auto& z : zones.zones) col.push_back(z.postcode_2 == *it ? 1.0 : 0.0);
        b.add("postcode_2_" + *it, std::move(col));
      }
    } else if (block.rfind("osm_r", 0) == 0) {
      std::vector<double> radii;
      if (block == "osm_rALL") {
        radii.assign(geo::kBufferRadiiKm.begin(), geo::kBufferRadiiKm.end());
      } else {
        radii.push_back(geo::parse_radius_label(block.substr(4)));
      }
      for (double r : radii) {
        const auto it = sources.env.find(r);
        if (it == sources.env.end()) {
          throw ConfigError("feature block " + block + ": no env table for radius " + geo::radius_label(r));
        }
        add_env(b, it->second);
      }
    } else if (block == "embeddings") {
      if (sources.embeddings.empty()) throw ConfigError("feature block embeddings: no embedding files loaded");
      for (const auto& [label, e] : sources.embeddings) add_embedding(b, e);
    } else {
      const auto label = block.substr(4);
      const auto it = sources.embeddings.find(label);
      if (it == sources.embeddings.end()) throw ConfigError("feature block " + block + ": embedding not loaded");
      add_embedding(b, it->second);
    }
  }

  FeatureMatrix m;
  m.zone_ids = zones.postcodes();
  m.columns = std::move(b.names);
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b.cols.size()));
  for (std::size_t j = 0; j < b.cols.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = b.cols[j][i];
    }
  }
  m.exposure.resize(static_cast<Eigen::Index>(n));
  m.target.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    m.exposure(static_cast<Eigen::Index>(i)) = zones.zones[i].expo_ag;
    m.target(static_cast<Eigen::Index>(i)) = static_cast<double>(zones.zones[i].nclaims_ag);
  }
  m.validate();
  return m;
}

}  // namespace geofreq::features
