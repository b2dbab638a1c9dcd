#pragma once

#include <Eigen/Dense>
#include <sstream>
#include <string>

#include "geofreq/features.hpp"
#include "geofreq/ingest.hpp"
#include "geofreq/rng.hpp"

namespace testing {

inline geofreq::ingest::PolicyRecord policy(std::string postcode, double exposure, int nclaims, double ageph = 40.0) {
  geofreq::ingest::PolicyRecord r;
  r.exposure = exposure;
  r.nclaims = nclaims;
  r.ageph = ageph;
  r.bm = 5;
  r.power = 70;
  r.agec = 8;
  r.postcode = std::move(postcode);
  r.lat = 50.85;
  r.lon = 4.35;
  return r;
}

inline std::string header() {
  return "expo,coverage,ageph,sex,bm,power,agec,fuel,use,fleet,postcode,lat,long,nclaims\n";
}

/// Matrix with the given columns drawn from N(0,1), exposure in [lo, hi] and
/// counts from y ~ Poisson(e exp(eta)) where eta = b0 + X b.
inline geofreq::features::FeatureMatrix random_matrix(int n, int p, std::uint64_t seed, double lo = 1.0,
                                                      double hi = 10.0) {
  geofreq::CounterRng rng(seed, 99);
  geofreq::features::FeatureMatrix m;
  m.values.resize(n, p);
  m.exposure.resize(n);
  m.target.resize(n);
  for (int j = 0; j < p; ++j) m.columns.push_back("c" + std::to_string(j));
  for (int i = 0; i < n; ++i) {
    m.zone_ids.push_back(std::to_string(1000 + i));
    for (int j = 0; j < p; ++j) m.values(i, j) = rng.normal();
    m.exposure(i) = rng.uniform(lo, hi);
  }
  return m;
}

}  // namespace testing
