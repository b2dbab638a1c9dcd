#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>

#include "geofreq/features.hpp"
#include "geofreq/geo/landcover.hpp"
#include "geofreq/geo/layers.hpp"
#include "geofreq/ingest.hpp"
#include "geofreq/models/gbt.hpp"
#include "geofreq/rng.hpp"
#include "geofreq/zones.hpp"

namespace geofreq::synth {

/// Zones with a known log-linear Poisson structure.
struct SynthConfig {
  std::size_t n_zones = 583;
  /// Intercept first, then one slope per standard-normal feature.
  Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, std::log(0.13));
  double exposure_min = 50.0;
  double exposure_max = 500.0;
  /// Added to the log-rate times the standardized latitude of the centroid.
  double lat_trend = 0.0;
  double long_trend = 0.0;
  std::uint64_t seed = 1;

  /// Throws DomainError unless n_zones >= 6, 0 < exposure_min <= exposure_max
  /// and beta has an intercept.
  void validate() const;
};

struct SynthDataset {
  zones::ZoneTable zones;          // summaries are the features x01, x02, ...
  features::FeatureMatrix matrix;  // the same features with exposure and target
  Eigen::VectorXd beta;
};

/// Draws of zone i come from the substream (seed, i), so the result does not
/// depend on generation order. Centroids are uniform over 50.5..51.0 N,
/// 3.5..5.5 E.
SynthDataset generate_zones(const SynthConfig& cfg);

/// Inverse-transform Poisson draw. Rates above 500 are split into chunks
/// whose draws are summed.
long long poisson(CounterRng& rng, double rate);

/// Splits every zone into ceil(exposure) policies with random covariates,
/// equal exposure shares and the zone's claims dealt at random, so that
/// aggregation reproduces the zone exposure and claim totals.
ingest::PolicyTable generate_policies(const SynthDataset& data, std::uint64_t seed);

struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;
};

geo::FeatureLayer random_points(const std::string& tag, std::size_t n, const Box& box, CounterRng& rng);
/// n polylines of `segments` segments each; steps are uniform in +-max_step.
geo::FeatureLayer random_roads(std::size_t n, std::size_t segments, double max_step, const Box& box,
                               CounterRng& rng);
/// Every required layer: roads plus `points_per_layer` points per point tag.
geo::LayerSet random_layer_set(const Box& box, std::size_t roads, std::size_t points_per_layer, std::uint64_t seed);

/// Grid covering box with the given share of artificial-surface cells (code
/// 111), the rest arable land (211).
geo::LandCoverGrid random_landcover(const Box& box, double cell, double artificial_share, std::uint64_t seed);

/// Brute force over all points, boundary inclusive.
std::size_t oracle_count_in_disc(std::span<const geo::ProjectedPoint> points, geo::ProjectedPoint center, double r);

/// Midpoint-rule sampling of every segment with `samples` points each; km.
double oracle_clip_length(std::span<const geo::Polyline> polylines, geo::ProjectedPoint center, double r,
                          std::size_t samples);

/// Exhaustive split enumeration with direct sums for every candidate.
std::optional<models::SplitCandidate> oracle_best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& g,
                                                        const Eigen::VectorXd& h, const models::GbtConfig& config);

}  // namespace geofreq::synth
