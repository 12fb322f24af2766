#include "rs/population.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rs {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

GeoPoint clamp_to_box(GeoPoint p, const BoundingBox& box) {
  p.lat = clamp(p.lat, box.min.lat, box.max.lat);
  p.lon = clamp(p.lon, box.min.lon, box.max.lon);
  return p;
}

GeoPoint sample_uniform(const BoundingBox& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ulat(box.min.lat, box.max.lat);
  std::uniform_real_distribution<double> ulon(box.min.lon, box.max.lon);
  GeoPoint p;
  p.lat = ulat(rng);
  p.lon = ulon(rng);
  return p;
}

GeoPoint sample_cluster_point(const ClusterSpec& c, const BoundingBox& box,
                              std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  GeoPoint p;
  p.lat = c.center.lat + gauss(rng) * c.spread_km / kKmPerDegree;
  p.lon = c.center.lon +
          gauss(rng) * c.spread_km / (kKmPerDegree * std::cos(c.center.lat * kDegToRad));
  return clamp_to_box(p, box);
}

// Picks from the per-kind mixture (kind or mixed), weights renormalized.
GeoPoint sample_mixture(const std::vector<ClusterSpec>& clusters, ClusterKind kind,
                        const BoundingBox& box, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& c : clusters)
    if (c.kind == kind || c.kind == ClusterKind::mixed) total += c.weight;
  if (total <= 0.0)
    throw std::invalid_argument("generate_city: no clusters for requested kind");
  std::uniform_real_distribution<double> u(0.0, total);
  double r = u(rng);
  const ClusterSpec* chosen = nullptr;
  for (const auto& c : clusters) {
    if (c.kind != kind && c.kind != ClusterKind::mixed) continue;
    chosen = &c;
    r -= c.weight;
    if (r <= 0.0) break;
  }
  return sample_cluster_point(*chosen, box, rng);
}

}  // namespace

void deterministic_shuffle(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng() % i]);
}

std::pair<double, double> sample_departures(double sigma_minutes, std::mt19937_64& rng) {
  if (sigma_minutes < 0.0)
    throw std::invalid_argument("sample_departures: sigma must be >= 0");
  if (sigma_minutes == 0.0) return {540.0, 1020.0};
  std::normal_distribution<double> from_home(540.0, sigma_minutes);
  std::normal_distribution<double> from_work(1020.0, sigma_minutes);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double lh = clamp(from_home(rng), 0.0, 1439.0);
    const double lw = clamp(from_work(rng), 0.0, 1439.0);
    if (lh < lw) return {lh, lw};
  }
  throw std::runtime_error("sample_departures: could not satisfy leave_home < leave_work");
}

std::vector<Commuter> generate_city(const CityConfig& config) {
  if (config.box.min.lat >= config.box.max.lat || config.box.min.lon >= config.box.max.lon)
    throw std::invalid_argument("generate_city: empty bounding box");
  if (config.car_ownership < 0.0 || config.car_ownership > 1.0)
    throw std::invalid_argument("generate_city: car_ownership outside [0,1]");
  if (config.mode == CityMode::clustered && config.clusters.empty())
    throw std::invalid_argument("generate_city: clustered mode needs cluster_spec");

  std::mt19937_64 rng(config.seed);
  std::vector<Commuter> out;
  out.reserve(config.n_commuters);
  for (std::size_t i = 0; i < config.n_commuters; ++i) {
    Commuter c;
    c.id = i + 1;
    if (config.mode == CityMode::uniform) {
      c.home = sample_uniform(config.box, rng);
      do {
        c.work = sample_uniform(config.box, rng);
      } while (c.work.lat == c.home.lat && c.work.lon == c.home.lon);
    } else {
      c.home = sample_mixture(config.clusters, ClusterKind::home, config.box, rng);
      do {
        c.work = sample_mixture(config.clusters, ClusterKind::work, config.box, rng);
      } while (c.work.lat == c.home.lat && c.work.lon == c.home.lon);
    }
    std::tie(c.leave_home, c.leave_work) = sample_departures(config.sigma_minutes, rng);
    c.capacity = 4;
    c.has_car = true;
    out.push_back(c);
  }
  return out;
}

std::vector<Commuter> subsample_owners(const std::vector<Commuter>& commuters,
                                       double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("subsample_owners: fraction outside [0,1]");
  const auto keep = static_cast<std::size_t>(std::floor(fraction * commuters.size()));
  std::vector<std::size_t> idx(commuters.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  deterministic_shuffle(idx, rng);
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  std::vector<Commuter> out;
  out.reserve(keep);
  for (std::size_t i : idx) {
    Commuter c = commuters[i];
    c.has_car = true;
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [](const Commuter& a, const Commuter& b) { return a.id < b.id; });
  return out;
}

namespace {

const char* kHeader =
    "id,home_lat,home_lon,work_lat,work_lon,leave_home_min,leave_work_min,capacity,has_car";

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
  throw std::runtime_error("commuter CSV line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& s, std::size_t line, const char* field) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) csv_error(line, std::string("bad field ") + field);
  return v;
}

}  // namespace

std::vector<Commuter> load_commuters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file, header expected");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw std::runtime_error(path + ": unexpected header");

  std::vector<Commuter> out;
  std::set<std::uint64_t> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 9) csv_error(lineno, "expected 9 fields");

    Commuter c;
    c.id = static_cast<std::uint64_t>(parse_double(f[0], lineno, "id"));
    c.home.lat = parse_double(f[1], lineno, "home_lat");
    c.home.lon = parse_double(f[2], lineno, "home_lon");
    c.work.lat = parse_double(f[3], lineno, "work_lat");
    c.work.lon = parse_double(f[4], lineno, "work_lon");
    c.leave_home = parse_double(f[5], lineno, "leave_home_min");
    c.leave_work = parse_double(f[6], lineno, "leave_work_min");
    c.capacity = static_cast<int>(parse_double(f[7], lineno, "capacity"));
    if (f[8] == "true")
      c.has_car = true;
    else if (f[8] == "false")
      c.has_car = false;
    else
      csv_error(lineno, "bad field has_car");

    if (!is_valid(c.home)) csv_error(lineno, "home out of range");
    if (!is_valid(c.work)) csv_error(lineno, "work out of range");
    if (!(c.leave_home < c.leave_work)) csv_error(lineno, "leave_home >= leave_work");
    if (c.capacity < 1) csv_error(lineno, "capacity < 1");
    if (c.home.lat == c.work.lat && c.home.lon == c.work.lon)
      csv_error(lineno, "home equals work");
    if (!seen.insert(c.id).second) csv_error(lineno, "duplicate id");
    out.push_back(c);
  }
  return out;
}

void save_commuters(const std::vector<Commuter>& commuters, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kHeader << "\n";
  char buf[256];
  for (const auto& c : commuters) {
    std::snprintf(buf, sizeof(buf), "%llu,%.7f,%.7f,%.7f,%.7f,%.7f,%.7f,%d,%s",
                  static_cast<unsigned long long>(c.id), c.home.lat, c.home.lon,
                  c.work.lat, c.work.lon, c.leave_home, c.leave_work, c.capacity,
                  c.has_car ? "true" : "false");
    out << buf << "\n";
  }
}

BoundingBox population_bbox(const std::vector<Commuter>& commuters) {
  if (commuters.empty()) throw std::invalid_argument("population_bbox: empty population");
  BoundingBox box{{90.0, 180.0}, {-90.0, -180.0}};
  for (const auto& c : commuters) {
    for (const GeoPoint& p : {c.home, c.work}) {
      box.min.lat = std::min(box.min.lat, p.lat);
      box.min.lon = std::min(box.min.lon, p.lon);
      box.max.lat = std::max(box.max.lat, p.lat);
      box.max.lon = std::max(box.max.lon, p.lon);
    }
  }
  return box;
}

CityConfig city_preset(const std::string& name, std::size_t n, std::uint64_t seed) {
  CityConfig cfg;
  cfg.n_commuters = n;
  cfg.seed = seed;
  cfg.sigma_minutes = 30.0;
  cfg.box = BoundingBox{{40.30, -3.90}, {40.58, -3.52}};  // ~31 x 32 km
  if (name == "uniform-metro") {
    cfg.mode = CityMode::uniform;
    return cfg;
  }
  if (name == "clustered-metro") {
    cfg.mode = CityMode::clustered;
    cfg.clusters = {
        {{40.45, -3.82}, 0.30, 1.0, ClusterKind::home},
        {{40.35, -3.60}, 0.30, 1.0, ClusterKind::home},
        {{40.52, -3.70}, 0.20, 1.0, ClusterKind::home},
        {{40.38, -3.76}, 0.20, 1.0, ClusterKind::home},
        {{40.42, -3.70}, 0.50, 0.8, ClusterKind::work},
        {{40.47, -3.62}, 0.30, 0.8, ClusterKind::work},
        {{40.33, -3.68}, 0.20, 0.8, ClusterKind::work},
    };
    return cfg;
  }
  throw std::invalid_argument("unknown city preset: " + name);
}

}  // namespace rs
