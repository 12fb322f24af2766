#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rs/geo.hpp"

namespace rs {

struct Commuter {
  std::uint64_t id = 0;
  GeoPoint home;
  GeoPoint work;
  double leave_home = 540.0;   // LH(u), minutes since midnight
  double leave_work = 1020.0;  // LW(u)
  int capacity = 4;            // c(v), seats including the driver
  bool has_car = true;
};

struct BoundingBox {
  GeoPoint min;  // south-west corner
  GeoPoint max;  // north-east corner
};

enum class CityMode { uniform, clustered };
enum class ClusterKind { home, work, mixed };

struct ClusterSpec {
  GeoPoint center;
  double weight = 1.0;  // per-kind weights sum to 1
  double spread_km = 1.0;
  ClusterKind kind = ClusterKind::mixed;
};

struct CityConfig {
  std::size_t n_commuters = 0;
  CityMode mode = CityMode::uniform;
  BoundingBox box;
  std::vector<ClusterSpec> clusters;
  double sigma_minutes = 30.0;
  double car_ownership = 1.0;
  std::uint64_t seed = 0;
};

// Deterministic Fisher-Yates; std::shuffle is not pinned across toolchains.
void deterministic_shuffle(std::vector<std::size_t>& idx, std::mt19937_64& rng);

// Departures ~ N(540, sigma) and N(1020, sigma), resampled (up to 100 times)
// until leave_home < leave_work, then clamped to [0, 1439].
std::pair<double, double> sample_departures(double sigma_minutes, std::mt19937_64& rng);

std::vector<Commuter> generate_city(const CityConfig& config);

// floor(fraction*n) commuters drawn uniformly without replacement; the
// returned commuters have has_car = true. Output sorted by id.
std::vector<Commuter> subsample_owners(const std::vector<Commuter>& commuters,
                                       double fraction, std::uint64_t seed);

// CSV: id,home_lat,home_lon,work_lat,work_lon,leave_home_min,leave_work_min,capacity,has_car
std::vector<Commuter> load_commuters(const std::string& path);
void save_commuters(const std::vector<Commuter>& commuters, const std::string& path);

BoundingBox population_bbox(const std::vector<Commuter>& commuters);

// Named configs used by the CLI and tests: "uniform-metro", "clustered-metro".
CityConfig city_preset(const std::string& name, std::size_t n, std::uint64_t seed);

}  // namespace rs
