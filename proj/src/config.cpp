#include "geofreq/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "geofreq/error.hpp"
#include "geofreq/geo/buffer.hpp"

namespace geofreq::config {
namespace {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = csv::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

class Section {
 public:
  Section(const std::string& name, const pt::ptree& tree) : name_(name), tree_(tree) {}

  const std::string& name() const { return name_; }

  void allow(std::initializer_list<std::string_view> keys) const {
    const std::set<std::string_view> ok(keys);
    for (const auto& [key, _] : tree_) {
      if (!ok.contains(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
    }
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto it = tree_.find(key);
    if (it == tree_.not_found()) return std::nullopt;
    return csv::trim(it->second.data());
  }

  double number(const std::string& key, double fallback) const {
    const auto t = text(key);
    if (!t) return fallback;
    const auto v = csv::parse_double(*t);
    if (!v) throw ConfigError(where(key) + " is not a number: " + *t);
    return *v;
  }

  long long integer(const std::string& key, long long fallback) const {
    const double v = number(key, static_cast<double>(fallback));
    if (v != std::floor(v)) throw ConfigError(where(key) + " must be an integer");
    return static_cast<long long>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    const auto t = text(key);
    if (!t) return fallback;
    if (*t == "true" || *t == "1" || *t == "yes" || *t == "on") return true;
    if (*t == "false" || *t == "0" || *t == "no" || *t == "off") return false;
    throw ConfigError(where(key) + " must be true or false: " + *t);
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    const auto t = text(key);
    if (!t) return fallback;
    std::vector<double> out;
    for (const auto& part : split(*t, ',')) {
      const auto v = csv::parse_double(part);
      if (!v) throw ConfigError(where(key) + ": not a number: " + part);
      out.push_back(*v);
    }
    return out;
  }

  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

 private:
  std::string name_;
  const pt::ptree& tree_;
};

char parse_char(const std::string& text, const std::string& what) {
  if (text == "tab") return '\t';
  if (text == "comma") return ',';
  if (text == "semicolon") return ';';
  if (text == "dot") return '.';
  if (text.size() == 1) return text[0];
  throw ConfigError(what + " must be a single character, tab, comma, semicolon or dot");
}

std::string char_name(char c) {
  switch (c) {
    case '\t': return "tab";
    case ',': return "comma";
    case ';': return "semicolon";
    case '.': return "dot";
    default: return std::string(1, c);
  }
}

fs::path resolve(const fs::path& base, const std::string& text) {
  if (text.empty()) return {};
  const fs::path p(text);
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

std::string num(double v) { return csv::format_double(v); }

std::string join_numbers(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double x : v) s.push_back(num(x));
  return join(s, ", ");
}

}  // namespace

fs::path RunConfig::zones_path() const {
  return paths.zones.empty() ? paths.output / "zones.csv" : paths.zones;
}

fs::path RunConfig::env_dir() const { return paths.env_dir.empty() ? paths.output : paths.env_dir; }

RunConfig parse_config(std::istream& in, const fs::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  static const std::set<std::string> sections{"paths", "schema", "ingest", "geo", "features", "embeddings",
                                              "model", "experiment", "synth", "coverage"};
  for (const auto& [name, child] : tree) {
    if (!sections.contains(name)) throw ConfigError("unknown section [" + name + "]");
    if (!child.data().empty()) throw ConfigError("key '" + name + "' outside a section");
  }
  const pt::ptree empty;
  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? empty : it->second);
  };

  {
    const auto s = section("paths");
    s.allow({"policies", "zones", "layers", "landcover", "postcode_areas", "env_dir", "output"});
    auto path = [&](const std::string& key) { return resolve(base_dir, s.text(key).value_or("")); };
    cfg.paths.policies = path("policies");
    cfg.paths.zones = path("zones");
    cfg.paths.landcover = path("landcover");
    cfg.paths.postcode_areas = path("postcode_areas");
    cfg.paths.env_dir = path("env_dir");
    if (const auto out = s.text("output")) cfg.paths.output = resolve(base_dir, *out);
    if (const auto layers = s.text("layers")) {
      for (const auto& l : split(*layers, ',')) cfg.paths.layers.push_back(resolve(base_dir, l));
    }
  }
  {
    const auto it = tree.find("schema");
    if (it != tree.not_found()) {
      const auto& fields = ingest::Schema::fields();
      for (const auto& [key, value] : it->second) {
        if (std::find(fields.begin(), fields.end(), key) == fields.end()) {
          throw ConfigError("[schema] unknown field '" + key + "'");
        }
        cfg.schema.columns[key] = csv::trim(value.data());
      }
    }
  }
  {
    const auto s = section("ingest");
    s.allow({"strict", "delimiter", "decimal", "max_claims"});
    cfg.strict = s.flag("strict", cfg.strict);
    if (const auto d = s.text("delimiter")) cfg.dialect.delimiter = parse_char(*d, s.where("delimiter"));
    if (const auto d = s.text("decimal")) cfg.dialect.decimal = parse_char(*d, s.where("decimal"));
    if (const auto m = s.text("max_claims"); m && *m == "none") {
      cfg.max_claims.reset();
    } else {
      cfg.max_claims = static_cast<int>(s.integer("max_claims", *cfg.max_claims));
      if (*cfg.max_claims < 0) throw ConfigError("[ingest] max_claims must be >= 0");
    }
  }
  {
    const auto s = section("geo");
    s.allow({"radii", "crs", "permissive", "mask"});
    cfg.radii = s.numbers("radii", cfg.radii);
    for (double r : cfg.radii) {
      if (std::find(geo::kBufferRadiiKm.begin(), geo::kBufferRadiiKm.end(), r) == geo::kBufferRadiiKm.end()) {
        throw ConfigError("[geo] radii must be among 0.5, 1, 3, 5 (got " + num(r) + ")");
      }
    }
    if (const auto crs = s.text("crs")) {
      if (*crs == "wgs84") cfg.layer_crs = geo::InputCrs::Wgs84;
      else if (*crs == "lambert72") cfg.layer_crs = geo::InputCrs::Lambert72;
      else throw ConfigError("[geo] crs must be wgs84 or lambert72");
    }
    cfg.permissive = s.flag("permissive", cfg.permissive);
    cfg.mask = s.flag("mask", cfg.mask);
  }
  {
    const auto s = section("features");
    s.allow({"specs"});
    if (const auto specs = s.text("specs")) {
      cfg.feature_specs.clear();
      for (const auto& spec : split(*specs, '|')) {
        auto blocks = split(spec, '+');
        for (const auto& b : blocks) {
          if (!features::is_block_name(b)) throw ConfigError("[features] unknown block '" + b + "'");
        }
        cfg.feature_specs.push_back(std::move(blocks));
      }
      if (cfg.feature_specs.empty()) throw ConfigError("[features] specs is empty");
    }
  }
  {
    const auto it = tree.find("embeddings");
    if (it != tree.not_found()) {
      const Section s("embeddings", it->second);
      for (const auto& [key, value] : it->second) {
        if (key.size() > 4 && key.ends_with("_dim")) continue;
        EmbeddingSource src;
        src.path = resolve(base_dir, csv::trim(value.data()));
        const auto dim = s.integer(key + "_dim", 0);
        if (dim <= 0) throw ConfigError("[embeddings] " + key + "_dim must be a positive integer");
        src.dimension = static_cast<std::size_t>(dim);
        cfg.embeddings[key] = std::move(src);
      }
      for (const auto& [key, _] : it->second) {
        if (key.ends_with("_dim") && !cfg.embeddings.contains(key.substr(0, key.size() - 4))) {
          throw ConfigError("[embeddings] " + key + " has no matching path");
        }
      }
    }
  }
  {
    const auto s = section("model");
    s.allow({"family", "grid", "include_lgamma", "irls_max_iterations", "enet_max_iterations", "gbt_min_child_hessian",
             "gbt_lambda_leaf", "gbt_gamma", "gbt_max_delta_step", "mlp_epochs", "mlp_seed"});
    if (const auto f = s.text("family")) cfg.family = eval::parse_family(*f);
    if (const auto g = s.text("grid")) {
      for (const auto& point : split(*g, '|')) cfg.grid.push_back(eval::parse_hyperparams(cfg.family, point));
    }
    auto& fit = cfg.fit;
    fit.include_lgamma = s.flag("include_lgamma", fit.include_lgamma);
    fit.irls.max_iterations = static_cast<int>(s.integer("irls_max_iterations", fit.irls.max_iterations));
    fit.enet.max_iterations = static_cast<int>(s.integer("enet_max_iterations", fit.enet.max_iterations));
    fit.gbt.min_child_hessian = s.number("gbt_min_child_hessian", fit.gbt.min_child_hessian);
    fit.gbt.lambda_leaf = s.number("gbt_lambda_leaf", fit.gbt.lambda_leaf);
    fit.gbt.gamma = s.number("gbt_gamma", fit.gbt.gamma);
    fit.gbt.max_delta_step = s.number("gbt_max_delta_step", fit.gbt.max_delta_step);
    fit.mlp.epochs = static_cast<int>(s.integer("mlp_epochs", fit.mlp.epochs));
    fit.mlp.seed = static_cast<std::uint64_t>(s.integer("mlp_seed", static_cast<long long>(fit.mlp.seed)));
    if (fit.irls.max_iterations < 1 || fit.enet.max_iterations < 1 || fit.mlp.epochs < 0) {
      throw ConfigError("[model] iteration counts must be positive");
    }
  }
  {
    const auto s = section("experiment");
    s.allow({"seed", "seeds", "strat_bins", "jobs"});
    cfg.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<long long>(cfg.seed)));
    if (s.text("seeds")) {
      cfg.seeds.clear();
      for (double v : s.numbers("seeds", {})) {
        if (v < 0 || v != std::floor(v)) throw ConfigError("[experiment] seeds must be non-negative integers");
        cfg.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    }
    cfg.strat_bins = static_cast<int>(s.integer("strat_bins", cfg.strat_bins));
    cfg.jobs = static_cast<int>(s.integer("jobs", cfg.jobs));
    if (cfg.strat_bins < 1 || cfg.jobs < 0) throw ConfigError("[experiment] strat_bins >= 1 and jobs >= 0 required");
  }
  {
    const auto s = section("synth");
    s.allow({"n_zones", "beta", "exposure_min", "exposure_max", "lat_trend", "long_trend", "seed"});
    auto& sy = cfg.synth;
    const auto n = s.integer("n_zones", static_cast<long long>(sy.n_zones));
    if (n < 6) throw ConfigError("[synth] n_zones must be >= 6");
    sy.n_zones = static_cast<std::size_t>(n);
    if (s.text("beta")) {
      const auto b = s.numbers("beta", {});
      if (b.empty()) throw ConfigError("[synth] beta needs an intercept");
      sy.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    }
    sy.exposure_min = s.number("exposure_min", sy.exposure_min);
    sy.exposure_max = s.number("exposure_max", sy.exposure_max);
    sy.lat_trend = s.number("lat_trend", sy.lat_trend);
    sy.long_trend = s.number("long_trend", sy.long_trend);
    sy.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<long long>(sy.seed)));
    try {
      sy.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("[synth] ") + e.what());
    }
  }
  {
    const auto s = section("coverage");
    s.allow({"disc_radii", "square_apothems"});
    cfg.coverage.disc_radii_km = s.numbers("disc_radii", cfg.coverage.disc_radii_km);
    cfg.coverage.square_apothems_km = s.numbers("square_apothems", cfg.coverage.square_apothems_km);
    for (double v : cfg.coverage.disc_radii_km) {
      if (!(v > 0.0)) throw ConfigError("[coverage] sizes must be positive");
    }
    for (double v : cfg.coverage.square_apothems_km) {
      if (!(v > 0.0)) throw ConfigError("[coverage] sizes must be positive");
    }
  }
  return cfg;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  return parse_config(in, file.parent_path().empty() ? fs::path(".") : file.parent_path());
}

void write_resolved(std::ostream& out, const RunConfig& cfg) {
  pt::ptree tree;
  auto put = [&](const std::string& section, const std::string& key, const std::string& value) {
    tree.put_child(pt::ptree::path_type(section + "/" + key, '/'), pt::ptree(value));
  };
  put("paths", "policies", cfg.paths.policies.string());
  put("paths", "zones", cfg.zones_path().string());
  std::vector<std::string> layers;
  for (const auto& l : cfg.paths.layers) layers.push_back(l.string());
  put("paths", "layers", join(layers, ", "));
  put("paths", "landcover", cfg.paths.landcover.string());
  put("paths", "postcode_areas", cfg.paths.postcode_areas.string());
  put("paths", "env_dir", cfg.env_dir().string());
  put("paths", "output", cfg.paths.output.string());
  for (const auto& [field, column] : cfg.schema.columns) put("schema", field, column);
  put("ingest", "strict", cfg.strict ? "true" : "false");
  put("ingest", "delimiter", char_name(cfg.dialect.delimiter));
  put("ingest", "decimal", char_name(cfg.dialect.decimal));
  put("ingest", "max_claims", cfg.max_claims ? std::to_string(*cfg.max_claims) : "none");
  put("geo", "radii", join_numbers(cfg.radii));
  put("geo", "crs", cfg.layer_crs == geo::InputCrs::Wgs84 ? "wgs84" : "lambert72");
  put("geo", "permissive", cfg.permissive ? "true" : "false");
  put("geo", "mask", cfg.mask ? "true" : "false");
  std::vector<std::string> specs;
  for (const auto& s : cfg.feature_specs) specs.push_back(features::spec_label(s));
  put("features", "specs", join(specs, " | "));
  for (const auto& [label, src] : cfg.embeddings) {
    put("embeddings", label, src.path.string());
    put("embeddings", label + "_dim", std::to_string(src.dimension));
  }
  put("model", "family", eval::family_label(cfg.family));
  const auto grid = cfg.grid.empty() ? eval::default_grid(cfg.family) : cfg.grid;
  std::vector<std::string> points;
  for (const auto& g : grid) points.push_back(eval::label(g));
  put("model", "grid", join(points, " | "));
  put("model", "include_lgamma", cfg.fit.include_lgamma ? "true" : "false");
  put("model", "irls_max_iterations", std::to_string(cfg.fit.irls.max_iterations));
  put("model", "enet_max_iterations", std::to_string(cfg.fit.enet.max_iterations));
  put("model", "gbt_min_child_hessian", num(cfg.fit.gbt.min_child_hessian));
  put("model", "gbt_lambda_leaf", num(cfg.fit.gbt.lambda_leaf));
  put("model", "gbt_gamma", num(cfg.fit.gbt.gamma));
  put("model", "gbt_max_delta_step", num(cfg.fit.gbt.max_delta_step));
  put("model", "mlp_epochs", std::to_string(cfg.fit.mlp.epochs));
  put("model", "mlp_seed", std::to_string(cfg.fit.mlp.seed));
  put("experiment", "seed", std::to_string(cfg.seed));
  std::vector<std::string> seeds;
  for (auto s : cfg.seeds) seeds.push_back(std::to_string(s));
  put("experiment", "seeds", join(seeds, ", "));
  put("experiment", "strat_bins", std::to_string(cfg.strat_bins));
  put("experiment", "jobs", std::to_string(cfg.jobs));
  put("synth", "n_zones", std::to_string(cfg.synth.n_zones));
  put("synth", "beta",
      join_numbers(std::vector<double>(cfg.synth.beta.data(), cfg.synth.beta.data() + cfg.synth.beta.size())));
  put("synth", "exposure_min", num(cfg.synth.exposure_min));
  put("synth", "exposure_max", num(cfg.synth.exposure_max));
  put("synth", "lat_trend", num(cfg.synth.lat_trend));
  put("synth", "long_trend", num(cfg.synth.long_trend));
  put("synth", "seed", std::to_string(cfg.synth.seed));
  put("coverage", "disc_radii", join_numbers(cfg.coverage.disc_radii_km));
  put("coverage", "square_apothems", join_numbers(cfg.coverage.square_apothems_km));
  pt::write_ini(out, tree);
}

void require_file(const fs::path& p, const std::string& setting) {
  if (p.empty()) throw ConfigError(setting + " is not set");
  std::error_code ec;
  if (!fs::exists(p, ec)) throw ConfigError(setting + ": no such file: " + p.string());
}

}  // namespace geofreq::config
