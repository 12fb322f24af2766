#include "rs/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace rs {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

bool is_valid(const GeoPoint& p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

double distance_km(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = a.lat * kDegToRad;
  const double lat2 = b.lat * kDegToRad;
  const double dlat = (b.lat - a.lat) * kDegToRad;
  const double dlon = (b.lon - a.lon) * kDegToRad;
  const double sdlat = std::sin(dlat / 2.0);
  const double sdlon = std::sin(dlon / 2.0);
  const double h = sdlat * sdlat + std::cos(lat1) * std::cos(lat2) * sdlon * sdlon;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

GridCell to_cell(const GeoPoint& p, const GeoPoint& origin, double cell_km) {
  if (cell_km <= 0.0) throw std::invalid_argument("to_cell: cell_km must be positive");
  const double north_km = (p.lat - origin.lat) * kKmPerDegree;
  const double east_km =
      (p.lon - origin.lon) * kKmPerDegree * std::cos(origin.lat * kDegToRad);
  // Tiny negative offsets from float round-trips still belong to cell 0.
  constexpr double kSlackKm = 1e-9;
  if (north_km < -kSlackKm || east_km < -kSlackKm)
    throw std::out_of_range("to_cell: point south or west of grid origin");
  // Cells are half-open; nudge so boundary points that lost a few ulps in the
  // degree/km round trip still land in the higher-index cell.
  return GridCell{
      static_cast<int>(std::floor(std::max(0.0, north_km) / cell_km + kSlackKm)),
      static_cast<int>(std::floor(std::max(0.0, east_km) / cell_km + kSlackKm))};
}

GeoPoint cell_center(const GridCell& c, const GeoPoint& origin, double cell_km) {
  const double north_km = (c.row + 0.5) * cell_km;
  const double east_km = (c.col + 0.5) * cell_km;
  GeoPoint p;
  p.lat = origin.lat + north_km / kKmPerDegree;
  p.lon = origin.lon + east_km / (kKmPerDegree * std::cos(origin.lat * kDegToRad));
  return p;
}

}  // namespace rs
