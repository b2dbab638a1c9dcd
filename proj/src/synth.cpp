#include "geofreq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "geofreq/error.hpp"

namespace geofreq::synth {
namespace {

constexpr double kLatMin = 50.5, kLatMax = 51.0;
constexpr double kLonMin = 3.5, kLonMax = 5.5;
constexpr double kChunk = 500.0;

std::string feature_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "x%02zu", j + 1);
  return buf;
}

std::string zone_id(std::size_t i, std::size_t n) {
  return std::to_string((n <= 9000 ? 1000 : 10000) + i);
}

long long poisson_small(CounterRng& rng, double rate) {
  const double u = rng.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  long long k = 0;
  while (u >= cdf) {
    ++k;
    p *= rate / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // the tail no longer moves the sum
    cdf = next;
  }
  return k;
}

double segment_length(geo::ProjectedPoint a, geo::ProjectedPoint b) { return std::hypot(b.x - a.x, b.y - a.y); }

}  // namespace

void SynthConfig::validate() const {
  if (n_zones < 6) throw DomainError("synth: need at least 6 zones");
  if (!(exposure_min > 0.0) || !(exposure_max >= exposure_min)) throw DomainError("synth: invalid exposure range");
  if (beta.size() < 1) throw DomainError("synth: beta needs an intercept");
  if (!beta.allFinite()) throw DomainError("synth: beta must be finite");
}

long long poisson(CounterRng& rng, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw DomainError("poisson: rate must be finite and >= 0");
  long long total = 0;
  while (rate > kChunk) {
    total += poisson_small(rng, kChunk);
    rate -= kChunk;
  }
  return total + poisson_small(rng, rate);
}

SynthDataset generate_zones(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_zones;
  const auto p = static_cast<std::size_t>(cfg.beta.size() - 1);
  const double lat_mid = 0.5 * (kLatMin + kLatMax), lat_sd = (kLatMax - kLatMin) / std::sqrt(12.0);
  const double lon_mid = 0.5 * (kLonMin + kLonMax), lon_sd = (kLonMax - kLonMin) / std::sqrt(12.0);

  SynthDataset out;
  out.beta = cfg.beta;
  for (std::size_t j = 0; j < p; ++j) out.zones.summary_columns.push_back(feature_name(j));
  out.zones.zones.resize(n);
  auto& m = out.matrix;
  m.columns = out.zones.summary_columns;
  m.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  m.exposure.resize(static_cast<Eigen::Index>(n));
  m.target.resize(static_cast<Eigen::Index>(n));

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    CounterRng rng(cfg.seed, i + 1);
    auto& z = out.zones.zones[i];
    double eta = cfg.beta(0);
    for (std::size_t j = 0; j < p; ++j) {
      const double x = rng.normal();
      m.values(ii, static_cast<Eigen::Index>(j)) = x;
      z.summaries.push_back(x);
      eta += cfg.beta(static_cast<Eigen::Index>(j + 1)) * x;
    }
    const double e = rng.uniform(cfg.exposure_min, cfg.exposure_max);
    z.lat = rng.uniform(kLatMin, kLatMax);
    z.lon = rng.uniform(kLonMin, kLonMax);
    eta += cfg.lat_trend * (z.lat - lat_mid) / lat_sd + cfg.long_trend * (z.lon - lon_mid) / lon_sd;
    const long long y = poisson(rng, e * std::exp(eta));
    z.postcode = zone_id(i, n);
    z.postcode_2 = zones::derive_region_code(z.postcode);
    z.n_policies = static_cast<std::size_t>(std::ceil(e));
    z.expo_ag = e;
    z.nclaims_ag = y;
    z.freq = static_cast<double>(y) / e;
    m.exposure(ii) = e;
    m.target(ii) = static_cast<double>(y);
  }
  for (const auto& z : out.zones.zones) m.zone_ids.push_back(z.postcode);
  return out;
}

ingest::PolicyTable generate_policies(const SynthDataset& data, std::uint64_t seed) {
  ingest::PolicyTable table;
  for (std::size_t i = 0; i < data.zones.zones.size(); ++i) {
    const auto& z = data.zones.zones[i];
    CounterRng rng(seed, 0x706f6c + i);
    const auto count = static_cast<std::size_t>(std::ceil(z.expo_ag));
    const double share = z.expo_ag / static_cast<double>(count);
    std::vector<int> claims(count, 0);
    for (long long c = 0; c < z.nclaims_ag; ++c) ++claims[static_cast<std::size_t>(rng.below(count))];
    for (std::size_t k = 0; k < count; ++k) {
      ingest::PolicyRecord r;
      r.exposure = share;
      r.coverage = static_cast<ingest::Coverage>(rng.below(3));
      r.ageph = static_cast<double>(18 + rng.below(73));
      r.sex = rng.below(2) ? ingest::Sex::Male : ingest::Sex::Female;
      r.bm = static_cast<int>(rng.below(23));
      r.power = static_cast<double>(10 + rng.below(231));
      r.agec = static_cast<double>(rng.below(49));
      r.fuel = rng.below(3) ? ingest::Fuel::Gasoline : ingest::Fuel::Diesel;
      r.use = rng.below(10) ? ingest::Use::Private : ingest::Use::Work;
      r.fleet = rng.below(30) == 0;
      r.postcode = z.postcode;
      r.lat = z.lat;
      r.lon = z.lon;
      r.nclaims = claims[k];
      table.push_back(std::move(r));
    }
  }
  return table;
}

geo::FeatureLayer random_points(const std::string& tag, std::size_t n, const Box& box, CounterRng& rng) {
  geo::FeatureLayer layer{geo::LayerKind::Point, tag, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    layer.points.push_back({rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)});
  }
  return layer;
}

geo::FeatureLayer random_roads(std::size_t n, std::size_t segments, double max_step, const Box& box,
                               CounterRng& rng) {
  geo::FeatureLayer layer{geo::LayerKind::Polyline, "road", {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    geo::Polyline line{{rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax)}};
    for (std::size_t s = 0; s < segments; ++s) {
      const auto& last = line.back();
      line.push_back({std::clamp(last.x + rng.uniform(-max_step, max_step), box.xmin, box.xmax),
                      std::clamp(last.y + rng.uniform(-max_step, max_step), box.ymin, box.ymax)});
    }
    layer.polylines.push_back(std::move(line));
  }
  return layer;
}

geo::LayerSet random_layer_set(const Box& box, std::size_t roads, std::size_t points_per_layer, std::uint64_t seed) {
  geo::LayerSet set;
  CounterRng rng(seed, 0x6c6179);
  for (const auto& tag : geo::required_layer_tags()) {
    if (geo::kind_of_tag(tag) == geo::LayerKind::Polyline) {
      set[tag] = random_roads(roads, 8, 400.0, box, rng);
    } else {
      set[tag] = random_points(tag, points_per_layer, box, rng);
    }
  }
  return set;
}

geo::LandCoverGrid random_landcover(const Box& box, double cell, double artificial_share, std::uint64_t seed) {
  if (!(cell > 0.0)) throw DomainError("random_landcover: cell must be positive");
  const auto width = static_cast<std::size_t>(std::ceil((box.xmax - box.xmin) / cell));
  const auto height = static_cast<std::size_t>(std::ceil((box.ymax - box.ymin) / cell));
  CounterRng rng(seed, 0x636c63);
  std::vector<int> codes(width * height);
  for (auto& c : codes) c = rng.uniform() < artificial_share ? 111 : 211;
  return geo::LandCoverGrid(box.xmin, box.ymin, cell, width, height, std::move(codes));
}

std::size_t oracle_count_in_disc(std::span<const geo::ProjectedPoint> points, geo::ProjectedPoint center, double r) {
  std::size_t count = 0;
  for (const auto& p : points) {
    const double dx = p.x - center.x, dy = p.y - center.y;
    if (dx * dx + dy * dy <= r * r) ++count;
  }
  return count;
}

double oracle_clip_length(std::span<const geo::Polyline> polylines, geo::ProjectedPoint center, double r,
                          std::size_t samples) {
  if (samples == 0) throw DomainError("oracle_clip_length: need at least one sample");
  double metres = 0.0;
  for (const auto& line : polylines) {
    for (std::size_t s = 1; s < line.size(); ++s) {
      const auto a = line[s - 1], b = line[s];
      std::size_t inside = 0;
      for (std::size_t k = 0; k < samples; ++k) {
        const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(samples);
        const double dx = a.x + t * (b.x - a.x) - center.x, dy = a.y + t * (b.y - a.y) - center.y;
        if (dx * dx + dy * dy <= r * r) ++inside;
      }
      metres += segment_length(a, b) * static_cast<double>(inside) / static_cast<double>(samples);
    }
  }
  return metres / 1000.0;
}

std::optional<models::SplitCandidate> oracle_best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& g,
                                                        const Eigen::VectorXd& h, const models::GbtConfig& config) {
  const double lambda = config.lambda_leaf;
  const double G = g.sum(), H = h.sum();
  const double parent = G * G / (H + lambda);
  std::optional<models::SplitCandidate> best;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    std::vector<double> values(x.col(j).data(), x.col(j).data() + x.rows());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 1; k < values.size(); ++k) {
      const double threshold = 0.5 * (values[k - 1] + values[k]);
      double gl = 0.0, hl = 0.0, gr = 0.0, hr = 0.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (x(i, j) < threshold) {
          gl += g(i);
          hl += h(i);
        } else {
          gr += g(i);
          hr += h(i);
        }
      }
      if (hl < config.min_child_hessian || hr < config.min_child_hessian) continue;
      const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent) - config.gamma;
      if (!(gain > 0.0)) continue;
      if (!best || gain > best->gain) best = models::SplitCandidate{static_cast<int>(j), threshold, gain};
    }
  }
  return best;
}

}  // namespace geofreq::synth
