#include "geofreq/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geofreq/error.hpp"

namespace geofreq::ingest {
namespace {

constexpr std::array<std::string_view, 3> kCoverageLabels{"TPL", "TPL+", "TPL++"};
constexpr std::array<std::string_view, 2> kSexLabels{"female", "male"};
constexpr std::array<std::string_view, 2> kFuelLabels{"gasoline", "diesel"};
constexpr std::array<std::string_view, 2> kUseLabels{"private", "work"};

template <class Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& labels, std::string_view text) {
  for (std::size_t i = 0; i < N; ++i) {
    if (labels[i] == text) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

std::optional<bool> parse_flag(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "1" || lower == "true" || lower == "yes") return true;
  if (lower == "0" || lower == "false" || lower == "no") return false;
  return std::nullopt;
}

struct MissingField {
  std::string field;
};

class RowParser {
 public:
  RowParser(const std::vector<std::string>& fields, const std::map<std::string, std::size_t>& index,
            char decimal)
      : fields_(fields), index_(index), decimal_(decimal) {}

  std::string text(const std::string& field) const {
    const auto pos = index_.at(field);
    if (pos >= fields_.size()) throw MissingField{field};
    auto value = csv::trim(fields_[pos]);
    if (value.empty() || value == "NA") throw MissingField{field};
    return value;
  }

  double real(const std::string& field) const {
    const auto t = text(field);
    const auto v = csv::parse_double(t, decimal_);
    if (!v) throw std::invalid_argument("unparseable numeric value '" + t + "' in " + field);
    return *v;
  }

  long long integer(const std::string& field) const {
    const auto t = text(field);
    if (const auto v = csv::parse_int(t)) return *v;
    const auto d = csv::parse_double(t, decimal_);
    if (d && std::floor(*d) == *d && std::abs(*d) < 9.0e15) return static_cast<long long>(*d);
    throw std::invalid_argument("unparseable integer value '" + t + "' in " + field);
  }

  template <class Enum, std::size_t N>
  Enum category(const std::string& field, const std::array<std::string_view, N>& labels) const {
    const auto t = text(field);
    const auto v = lookup<Enum>(labels, t);
    if (!v) throw std::invalid_argument("unknown " + field + " label '" + t + "'");
    return *v;
  }

 private:
  const std::vector<std::string>& fields_;
  const std::map<std::string, std::size_t>& index_;
  char decimal_;
};

PolicyRecord parse_record(const RowParser& p) {
  PolicyRecord r;
  r.exposure = p.real("expo");
  r.coverage = p.category<Coverage>("coverage", kCoverageLabels);
  r.ageph = p.real("ageph");
  r.sex = p.category<Sex>("sex", kSexLabels);
  const auto bm = p.integer("bm");
  r.bm = static_cast<int>(std::clamp<long long>(bm, -1, 1000));
  r.power = p.real("power");
  r.agec = p.real("agec");
  r.fuel = p.category<Fuel>("fuel", kFuelLabels);
  r.use = p.category<Use>("use", kUseLabels);
  const auto fleet = parse_flag(p.text("fleet"));
  if (!fleet) throw std::invalid_argument("unknown fleet label '" + p.text("fleet") + "'");
  r.fleet = *fleet;
  r.postcode = p.text("postcode");
  r.lat = p.real("lat");
  r.lon = p.real("long");
  const auto n = p.integer("nclaims");
  r.nclaims = static_cast<int>(std::clamp<long long>(n, -1, 1'000'000'000));
  return r;
}

}  // namespace

std::string_view label(Coverage c) { return kCoverageLabels[static_cast<std::size_t>(c)]; }
std::string_view label(Sex s) { return kSexLabels[static_cast<std::size_t>(s)]; }
std::string_view label(Fuel f) { return kFuelLabels[static_cast<std::size_t>(f)]; }
std::string_view label(Use u) { return kUseLabels[static_cast<std::size_t>(u)]; }

std::optional<std::string> check_invariants(const PolicyRecord& r) {
  if (!(r.exposure > 0.0 && r.exposure <= 1.0)) return "exposure out of (0,1]";
  if (r.bm < 0 || r.bm > 22) return "bm out of [0,22]";
  if (r.nclaims < 0) return "nclaims negative";
  if (!(r.lat >= -90.0 && r.lat <= 90.0)) return "lat out of [-90,90]";
  if (!(r.lon >= -180.0 && r.lon <= 180.0)) return "long out of [-180,180]";
  if (!std::isfinite(r.ageph) || !std::isfinite(r.power) || !std::isfinite(r.agec)) {
    return "non-finite covariate";
  }
  if (r.postcode.empty()) return "empty postcode";
  return std::nullopt;
}

const std::vector<NumericVar>& numeric_vars() {
  static const std::vector<NumericVar> vars{
      {"ageph", [](const PolicyRecord& r) { return r.ageph; }},
      {"bm", [](const PolicyRecord& r) { return static_cast<double>(r.bm); }},
      {"power", [](const PolicyRecord& r) { return r.power; }},
      {"agec", [](const PolicyRecord& r) { return r.agec; }},
  };
  return vars;
}

const std::vector<CategoricalVar>& categorical_vars() {
  static const std::vector<CategoricalVar> vars{
      {"coverage",
       {kCoverageLabels.begin(), kCoverageLabels.end()},
       [](const PolicyRecord& r) { return static_cast<std::size_t>(r.coverage); }},
      {"sex",
       {kSexLabels.begin(), kSexLabels.end()},
       [](const PolicyRecord& r) { return static_cast<std::size_t>(r.sex); }},
      {"fuel",
       {kFuelLabels.begin(), kFuelLabels.end()},
       [](const PolicyRecord& r) { return static_cast<std::size_t>(r.fuel); }},
      {"use",
       {kUseLabels.begin(), kUseLabels.end()},
       [](const PolicyRecord& r) { return static_cast<std::size_t>(r.use); }},
      {"fleet", {"0", "1"}, [](const PolicyRecord& r) { return static_cast<std::size_t>(r.fleet); }},
  };
  return vars;
}

const std::vector<std::string>& Schema::fields() {
  static const std::vector<std::string> f{"expo",  "coverage", "ageph", "sex",      "bm",
                                          "power", "agec",     "fuel",  "use",      "fleet",
                                          "postcode", "lat",   "long",  "nclaims"};
  return f;
}

Schema Schema::defaults() {
  Schema s;
  for (const auto& f : fields()) s.columns[f] = f;
  return s;
}

ParseResult parse_policies(std::istream& source, const Schema& schema, const ParseOptions& options) {
  ParseResult result;
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(source, line, line_no)) throw SchemaError("missing header row");

  const auto header = csv::split(line, options.dialect.delimiter);
  std::map<std::string, std::size_t> index;
  for (const auto& field : Schema::fields()) {
    const auto it = schema.columns.find(field);
    const std::string column = it == schema.columns.end() ? field : it->second;
    const auto pos = std::find_if(header.begin(), header.end(),
                                  [&](const std::string& h) { return csv::trim(h) == column; });
    if (pos == header.end()) {
      throw SchemaError("mapped column '" + column + "' (field " + field + ") not in header");
    }
    index[field] = static_cast<std::size_t>(pos - header.begin());
  }

  while (csv::next_line(source, line, line_no)) {
    ++result.rows_read;
    const auto fields = csv::split(line, options.dialect.delimiter);
    std::string problem;
    try {
      auto rec = parse_record(RowParser(fields, index, options.dialect.decimal));
      if (auto bad = check_invariants(rec)) {
        problem = *bad;
      } else {
        result.table.push_back(std::move(rec));
        continue;
      }
    } catch (const MissingField& m) {
      ++result.rows_missing_fields;
      problem = "missing value for " + m.field;
    } catch (const std::invalid_argument& e) {
      problem = e.what();
    }
    if (options.strict) throw RowError(line_no, problem);
    result.issues.push_back({line_no, std::move(problem)});
  }
  return result;
}

void write_policies(std::ostream& out, const PolicyTable& table, const csv::Dialect& dialect) {
  csv::Writer w(out, dialect.delimiter);
  w.row(Schema::fields());
  auto num = [&](double v) {
    auto s = csv::format_double(v);
    if (dialect.decimal != '.') std::replace(s.begin(), s.end(), '.', dialect.decimal);
    return s;
  };
  for (const auto& r : table) {
    w.row({num(r.exposure), std::string(label(r.coverage)), num(r.ageph), std::string(label(r.sex)),
           std::to_string(r.bm), num(r.power), num(r.agec), std::string(label(r.fuel)),
           std::string(label(r.use)), r.fleet ? "1" : "0", r.postcode, num(r.lat), num(r.lon),
           std::to_string(r.nclaims)});
  }
}

PolicyTable filter_max_claims(const PolicyTable& table, int max_claims) {
  if (max_claims < 0) throw DomainError("max_claims must be non-negative");
  PolicyTable kept;
  kept.reserve(table.size());
  std::copy_if(table.begin(), table.end(), std::back_inserter(kept),
               [max_claims](const PolicyRecord& r) { return r.nclaims <= max_claims; });
  return kept;
}

}  // namespace geofreq::ingest
