#include "rs/cdr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rs {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

std::int64_t day_index(std::int64_t ts) { return ts / kSecondsPerDay; }

bool in_home_hours(int minute) { return minute >= 19 * 60 || minute < 7 * 60; }
bool in_work_hours(int minute) { return minute >= 13 * 60 && minute < 17 * 60; }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

bool is_weekend(std::int64_t timestamp) {
  const int dow = static_cast<int>((day_index(timestamp) + 4) % 7);  // 0 = Sunday
  return dow == 0 || dow == 6;
}

int minutes_of_day(std::int64_t timestamp) {
  return static_cast<int>((timestamp % kSecondsPerDay) / 60);
}

bool PlaceCluster::contains_tower(const GeoPoint& t) const {
  for (const auto& tw : towers)
    if (std::abs(tw.lat - t.lat) < 1e-9 && std::abs(tw.lon - t.lon) < 1e-9) return true;
  return false;
}

std::vector<PlaceCluster> cluster_events(std::span<const CdrEvent> events,
                                         double merge_radius_km) {
  if (events.empty()) return {};
  const std::uint64_t uid = events.front().user_id;
  for (const auto& e : events)
    if (e.user_id != uid)
      throw std::invalid_argument("cluster_events: events from multiple users");

  // distinct towers, keyed exactly; order by (lat, lon) for determinism
  std::map<std::pair<double, double>, std::size_t> tower_index;
  std::vector<GeoPoint> towers;
  std::vector<std::size_t> event_tower(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto key = std::make_pair(events[i].tower.lat, events[i].tower.lon);
    auto [it, inserted] = tower_index.try_emplace(key, towers.size());
    if (inserted) towers.push_back(events[i].tower);
    event_tower[i] = it->second;
  }

  DisjointSet ds(towers.size());
  for (std::size_t i = 0; i < towers.size(); ++i)
    for (std::size_t j = i + 1; j < towers.size(); ++j)
      if (distance_km(towers[i], towers[j]) <= merge_radius_km) ds.unite(i, j);

  std::map<std::size_t, std::size_t> root_to_cluster;
  std::vector<PlaceCluster> clusters;
  std::vector<std::size_t> tower_cluster(towers.size());
  for (std::size_t t = 0; t < towers.size(); ++t) {
    auto [it, inserted] = root_to_cluster.try_emplace(ds.find(t), clusters.size());
    if (inserted) clusters.emplace_back();
    tower_cluster[t] = it->second;
    clusters[it->second].towers.push_back(towers[t]);
  }

  std::vector<std::set<std::int64_t>> cluster_days(clusters.size());
  std::vector<std::map<std::size_t, std::set<std::int64_t>>> tower_days(clusters.size());
  std::vector<std::int64_t> first_day(clusters.size(), INT64_MAX);
  std::vector<std::int64_t> last_day(clusters.size(), INT64_MIN);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::size_t c = tower_cluster[event_tower[i]];
    const std::int64_t d = day_index(events[i].timestamp);
    cluster_days[c].insert(d);
    tower_days[c][event_tower[i]].insert(d);
    first_day[c] = std::min(first_day[c], d);
    last_day[c] = std::max(last_day[c], d);
    const int minute = minutes_of_day(events[i].timestamp);
    clusters[c].total_events++;
    if (in_home_hours(minute)) clusters[c].home_hour_events++;
    if (in_work_hours(minute)) clusters[c].work_hour_events++;
  }

  for (std::size_t c = 0; c < clusters.size(); ++c) {
    clusters[c].days_appeared = static_cast<int>(cluster_days[c].size());
    clusters[c].duration_weeks = static_cast<int>((last_day[c] - first_day[c]) / 7);
    double wsum = 0.0, lat = 0.0, lon = 0.0;
    for (const auto& [t, days] : tower_days[c]) {
      const double w = static_cast<double>(days.size());
      lat += towers[t].lat * w;
      lon += towers[t].lon * w;
      wsum += w;
    }
    clusters[c].centroid = GeoPoint{lat / wsum, lon / wsum};
  }

  // rank 1 = most days; ties broken by more events, then by centroid
  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (clusters[a].days_appeared != clusters[b].days_appeared)
      return clusters[a].days_appeared > clusters[b].days_appeared;
    if (clusters[a].total_events != clusters[b].total_events)
      return clusters[a].total_events > clusters[b].total_events;
    return std::make_pair(clusters[a].centroid.lat, clusters[a].centroid.lon) <
           std::make_pair(clusters[b].centroid.lat, clusters[b].centroid.lon);
  });
  std::vector<PlaceCluster> ranked;
  ranked.reserve(clusters.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    clusters[order[r]].rank = static_cast<int>(r + 1);
    ranked.push_back(clusters[order[r]]);
  }
  return ranked;
}

bool eligible(std::span<const CdrEvent> events, const std::vector<PlaceCluster>& clusters) {
  if (events.empty()) return false;
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (const auto& e : events) {
    lo = std::min(lo, day_index(e.timestamp));
    hi = std::max(hi, day_index(e.timestamp));
  }
  const double span_days = static_cast<double>(hi - lo + 1);
  if (static_cast<double>(events.size()) / span_days < 1.0) return false;
  int qualifying = 0;
  for (const auto& c : clusters)
    if (c.days_appeared >= 3 && c.duration_weeks >= 2) ++qualifying;
  return qualifying >= 2;
}

bool eligible(std::span<const CdrEvent> events, double merge_radius_km) {
  if (events.empty()) return false;
  return eligible(events, cluster_events(events, merge_radius_km));
}

ScoreWeights default_weights() {
  ScoreWeights w;
  w.home = {1.0, 0.5, 0.5, 3.0, -3.0};
  w.work = {1.0, 0.5, 0.5, -3.0, 3.0};
  w.home_threshold = 0.5;
  w.work_threshold = 0.5;
  return w;
}

std::array<double, 5> cluster_features(const PlaceCluster& c,
                                       const std::vector<PlaceCluster>& all) {
  double total_days = 0, total_weeks = 0, total_home = 0, total_work = 0;
  for (const auto& k : all) {
    total_days += k.days_appeared;
    total_weeks += k.duration_weeks;
    total_home += k.home_hour_events;
    total_work += k.work_hour_events;
  }
  auto frac = [](double x, double total) { return total > 0 ? x / total : 0.0; };
  return {frac(c.days_appeared, total_days), frac(c.duration_weeks, total_weeks),
          c.rank > 0 ? 1.0 / c.rank : 0.0, frac(c.home_hour_events, total_home),
          frac(c.work_hour_events, total_work)};
}

namespace {

double score(const std::array<double, 5>& f, const std::array<double, 5>& w, double bias) {
  double s = bias;
  for (std::size_t i = 0; i < 5; ++i) s += f[i] * w[i];
  return s;
}

// argmax with the 1e-9 ambiguity rule; skip[i] masks clusters out
std::optional<std::size_t> pick_best(const std::vector<double>& scores,
                                     const std::vector<bool>& skip, double threshold) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (skip[i]) continue;
    if (!best || scores[i] > scores[*best]) best = i;
  }
  if (!best || scores[*best] <= threshold) return std::nullopt;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (!skip[i] && i != *best && std::abs(scores[i] - scores[*best]) < 1e-9)
      return std::nullopt;
  return best;
}

}  // namespace

std::optional<HomeWorkResult> classify_home_work(const std::vector<PlaceCluster>& clusters,
                                                 const ScoreWeights& w) {
  if (clusters.size() < 2) return std::nullopt;
  std::vector<double> home_scores(clusters.size()), work_scores(clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto f = cluster_features(clusters[i], clusters);
    home_scores[i] = score(f, w.home, w.home_bias);
    work_scores[i] = score(f, w.work, w.work_bias);
  }
  std::vector<bool> skip(clusters.size(), false);
  auto home = pick_best(home_scores, skip, w.home_threshold);
  if (!home) return std::nullopt;
  skip[*home] = true;
  auto work = pick_best(work_scores, skip, w.work_threshold);
  if (!work) return std::nullopt;
  HomeWorkResult r;
  r.home_cluster = *home;
  r.work_cluster = *work;
  r.home = clusters[*home].centroid;
  r.work = clusters[*work].centroid;
  return r;
}

ScoreWeights train_weights(std::span<const LabeledUser> labeled) {
  if (labeled.size() < 20)
    throw std::invalid_argument("train_weights: need at least 20 labeled users");

  struct Sample {
    std::array<double, 5> f;
    bool is_home;
    bool is_work;
  };
  std::vector<Sample> samples;
  for (const auto& user : labeled) {
    if (user.clusters.empty()) continue;
    std::size_t home_idx = 0, work_idx = 0;
    double best_h = 1e300, best_w = 1e300;
    for (std::size_t i = 0; i < user.clusters.size(); ++i) {
      const double dh = distance_km(user.clusters[i].centroid, user.true_home);
      const double dw = distance_km(user.clusters[i].centroid, user.true_work);
      if (dh < best_h) { best_h = dh; home_idx = i; }
      if (dw < best_w) { best_w = dw; work_idx = i; }
    }
    for (std::size_t i = 0; i < user.clusters.size(); ++i)
      samples.push_back({cluster_features(user.clusters[i], user.clusters), i == home_idx,
                         i == work_idx && work_idx != home_idx});
  }

  auto fit = [&](auto label) -> std::pair<std::array<double, 5>, double> {
    std::size_t pos = 0;
    for (const auto& s : samples) pos += label(s) ? 1 : 0;
    if (pos == 0 || pos == samples.size())
      throw std::runtime_error("train_weights: degenerate labels");
    std::array<double, 5> w{};
    double bias = 0.0;
    const double lr = 0.5;
    for (int iter = 0; iter < 2000; ++iter) {
      std::array<double, 5> grad{};
      double gbias = 0.0;
      for (const auto& s : samples) {
        const double z = score(s.f, w, bias);
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double err = p - (label(s) ? 1.0 : 0.0);
        for (std::size_t i = 0; i < 5; ++i) grad[i] += err * s.f[i];
        gbias += err;
      }
      const double n = static_cast<double>(samples.size());
      for (std::size_t i = 0; i < 5; ++i) w[i] -= lr * grad[i] / n;
      bias -= lr * gbias / n;
    }
    return {w, bias};
  };

  ScoreWeights out;
  std::tie(out.home, out.home_bias) = fit([](const Sample& s) { return s.is_home; });
  std::tie(out.work, out.work_bias) = fit([](const Sample& s) { return s.is_work; });
  out.home_threshold = 0.0;  // logit 0 <=> probability 0.5
  out.work_threshold = 0.0;
  return out;
}

std::pair<std::optional<double>, std::optional<double>> estimate_departure(
    std::span<const CdrEvent> events, const PlaceCluster& home_cluster,
    const PlaceCluster& work_cluster, double trip_time_min) {
  std::vector<CdrEvent> sorted(events.begin(), events.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CdrEvent& a, const CdrEvent& b) { return a.timestamp < b.timestamp; });

  auto collect = [&](const PlaceCluster& from, const PlaceCluster& to, int win_lo,
                     int win_hi) -> std::optional<double> {
    std::vector<double> times;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (!from.contains_tower(sorted[i].tower)) continue;
      const int minute = minutes_of_day(sorted[i].timestamp);
      if (minute < win_lo || minute >= win_hi) continue;
      for (std::size_t j = i + 1; j < sorted.size(); ++j) {
        if (!to.contains_tower(sorted[j].tower)) continue;
        const double gap_min =
            static_cast<double>(sorted[j].timestamp - sorted[i].timestamp) / 60.0;
        if (gap_min < 2.0 * trip_time_min) times.push_back(minute);
        break;  // only the next to-cluster call counts
      }
    }
    if (times.size() < 3) return std::nullopt;
    return median(std::move(times));
  };

  return {collect(home_cluster, work_cluster, 8 * 60, 10 * 60),
          collect(work_cluster, home_cluster, 16 * 60, 18 * 60)};
}

std::vector<CdrEvent> load_cdr(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::vector<CdrEvent> out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "user_id,timestamp_unix,tower_lat,tower_lon") continue;
    std::stringstream ss(line);
    std::string f[4];
    for (int i = 0; i < 4; ++i)
      if (!std::getline(ss, f[i], ','))
        throw std::runtime_error(path + " line " + std::to_string(lineno) + ": bad row");
    CdrEvent e;
    e.user_id = std::stoull(f[0]);
    e.timestamp = std::stoll(f[1]);
    e.tower.lat = std::stod(f[2]);
    e.tower.lon = std::stod(f[3]);
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const CdrEvent& a, const CdrEvent& b) {
    return std::tie(a.user_id, a.timestamp) < std::tie(b.user_id, b.timestamp);
  });
  return out;
}

void save_cdr(const std::vector<CdrEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "user_id,timestamp_unix,tower_lat,tower_lon\n";
  char buf[128];
  for (const auto& e : events) {
    std::snprintf(buf, sizeof(buf), "%llu,%lld,%.7f,%.7f",
                  static_cast<unsigned long long>(e.user_id),
                  static_cast<long long>(e.timestamp), e.tower.lat, e.tower.lon);
    out << buf << "\n";
  }
}

namespace {

GeoPoint snap_to_lattice(const GeoPoint& p, const BoundingBox& box, double spacing_km) {
  GridCell c = to_cell(p, box.min, spacing_km);
  return cell_center(c, box.min, spacing_km);
}

}  // namespace

SynthCdr synthesize_cdr(const std::vector<Commuter>& commuters, const BoundingBox& box,
                        const SynthCdrConfig& cfg) {
  SynthCdr out;
  const GridCell max_cell = to_cell(box.max, box.min, cfg.tower_spacing_km);
  for (const auto& c : commuters) {
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + c.id);
    const GeoPoint home_tower = snap_to_lattice(c.home, box, cfg.tower_spacing_km);
    const GeoPoint work_tower = snap_to_lattice(c.work, box, cfg.tower_spacing_km);
    if (std::abs(home_tower.lat - work_tower.lat) < 1e-12 &&
        std::abs(home_tower.lon - work_tower.lon) < 1e-12)
      continue;  // home and work share a tower, no commute signal

    auto rand_day = [&] { return static_cast<std::int64_t>(rng() % cfg.days); };
    auto emit = [&](std::int64_t day, double minute, const GeoPoint& tower) {
      CdrEvent e;
      e.user_id = c.id;
      e.timestamp = day * kSecondsPerDay + static_cast<std::int64_t>(minute * 60.0);
      e.tower = tower;
      out.events.push_back(e);
    };

    const int n_truth =
        static_cast<int>(std::lround(cfg.calls_per_user * cfg.truth_fraction));
    const int n_noise = cfg.calls_per_user - n_truth;

    // commute pairs on 6 distinct-ish days: enough valid samples for medians
    int used = 0;
    for (int k = 0; k < 6 && used + 4 <= n_truth; ++k) {
      const std::int64_t day = (k * cfg.days) / 6;
      emit(day, c.leave_home, home_tower);
      emit(day, c.leave_home + 0.8 * cfg.trip_time_min, work_tower);
      emit(day, c.leave_work, work_tower);
      emit(day, c.leave_work + 0.8 * cfg.trip_time_min, home_tower);
      used += 4;
    }
    // remaining truth calls split between home hours and work hours
    for (int k = used; k < n_truth; ++k) {
      if (k % 2 == 0) {
        const double minute = (rng() % 2 == 0) ? 19 * 60 + rng() % (5 * 60)
                                               : static_cast<double>(rng() % (7 * 60));
        emit(rand_day(), minute, home_tower);
      } else {
        emit(rand_day(), 13 * 60 + rng() % (4 * 60), work_tower);
      }
    }
    for (int k = 0; k < n_noise; ++k) {
      GridCell cell{static_cast<int>(rng() % (max_cell.row + 1)),
                    static_cast<int>(rng() % (max_cell.col + 1))};
      emit(rand_day(), static_cast<double>(rng() % 1440),
           cell_center(cell, box.min, cfg.tower_spacing_km));
    }
    out.truth.push_back({c.id, home_tower, work_tower, c.leave_home, c.leave_work});
  }
  std::sort(out.events.begin(), out.events.end(), [](const CdrEvent& a, const CdrEvent& b) {
    return std::tie(a.user_id, a.timestamp) < std::tie(b.user_id, b.timestamp);
  });
  return out;
}

}  // namespace rs
