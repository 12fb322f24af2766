#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rs/geo.hpp"
#include "rs/population.hpp"

namespace rs {

struct CdrEvent {
  std::uint64_t user_id = 0;
  std::int64_t timestamp = 0;  // seconds since epoch
  GeoPoint tower;
};

bool is_weekend(std::int64_t timestamp);
int minutes_of_day(std::int64_t timestamp);

struct PlaceCluster {
  GeoPoint centroid;  // days-weighted mean of member towers
  std::vector<GeoPoint> towers;
  int days_appeared = 0;
  int duration_weeks = 0;  // weeks between first and last appearance
  int rank = 0;            // 1-based, by days_appeared
  int home_hour_events = 0;  // calls in [19:00, 07:00), wrap-around
  int work_hour_events = 0;  // calls in [13:00, 17:00)
  int total_events = 0;

  bool contains_tower(const GeoPoint& t) const;
};

// Single-linkage clustering of distinct tower locations: towers chained by
// hops <= merge_radius_km share a cluster.
std::vector<PlaceCluster> cluster_events(std::span<const CdrEvent> events,
                                         double merge_radius_km);

// Activity filter: >= 1 call/day on average and >= 2 clusters with >= 3 days
// of appearance and >= 2 weeks of duration.
bool eligible(std::span<const CdrEvent> events, const std::vector<PlaceCluster>& clusters);
bool eligible(std::span<const CdrEvent> events, double merge_radius_km = 1.0);

// Two linear scorers over the 5 normalized cluster features
// (days, duration, rank, home-hour, work-hour).
struct ScoreWeights {
  std::array<double, 5> home{};
  double home_bias = 0.0;
  std::array<double, 5> work{};
  double work_bias = 0.0;
  double home_threshold = 0.0;
  double work_threshold = 0.0;
};

ScoreWeights default_weights();

std::array<double, 5> cluster_features(const PlaceCluster& c,
                                       const std::vector<PlaceCluster>& all);

struct HomeWorkResult {
  std::size_t home_cluster = 0;
  std::size_t work_cluster = 0;
  GeoPoint home;
  GeoPoint work;
};

// none when no unambiguous (home, work) pair clears the thresholds: ties
// within 1e-9 at the top score, or fewer than two clusters, reject the user.
std::optional<HomeWorkResult> classify_home_work(const std::vector<PlaceCluster>& clusters,
                                                 const ScoreWeights& w);

struct LabeledUser {
  std::vector<PlaceCluster> clusters;
  GeoPoint true_home;
  GeoPoint true_work;
};

// Logistic fit (full-batch gradient descent, zero init) of both scorers.
// Requires >= 20 labeled users; throws on degenerate labels.
ScoreWeights train_weights(std::span<const LabeledUser> labeled);

// Departure estimation from call pairs. A home sample is a home-cluster call
// at t in [8:00,10:00) followed by a work-cluster call within 2*trip_time_min;
// work samples use [16:00,18:00) followed by a home-cluster call. Median of
// samples; none with fewer than 3 samples.
std::pair<std::optional<double>, std::optional<double>> estimate_departure(
    std::span<const CdrEvent> events, const PlaceCluster& home_cluster,
    const PlaceCluster& work_cluster, double trip_time_min);

// CSV: user_id,timestamp_unix,tower_lat,tower_lon
std::vector<CdrEvent> load_cdr(const std::string& path);
void save_cdr(const std::vector<CdrEvent>& events, const std::string& path);

// --- synthetic traces with known ground truth ---

struct SynthCdrConfig {
  int calls_per_user = 50;
  double truth_fraction = 0.9;  // remainder lands on random towers
  int days = 60;
  double tower_spacing_km = 1.5;  // towers sit on a lattice over the city box
  double trip_time_min = 20.0;
  std::uint64_t seed = 1;
};

struct SynthCdr {
  std::vector<CdrEvent> events;  // sorted by (user, timestamp)
  // ground truth per user: tower-snapped home/work and planted departures
  struct Truth {
    std::uint64_t user_id;
    GeoPoint home_tower;
    GeoPoint work_tower;
    double leave_home;
    double leave_work;
  };
  std::vector<Truth> truth;
};

SynthCdr synthesize_cdr(const std::vector<Commuter>& commuters, const BoundingBox& box,
                        const SynthCdrConfig& cfg);

}  // namespace rs
