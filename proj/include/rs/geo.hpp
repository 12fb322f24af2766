#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace rs {

inline constexpr double kEarthRadiusKm = 6371.0;

// Arc length of one degree on the great circle, km.
inline constexpr double kKmPerDegree = 111.19492664455873;  // 2*pi*R/360

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
};

bool is_valid(const GeoPoint& p);

// Haversine distance on a sphere of radius kEarthRadiusKm.
double distance_km(const GeoPoint& a, const GeoPoint& b);

struct GridCell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

inline std::uint64_t pack(const GridCell& c) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.row)) << 32) |
         static_cast<std::uint32_t>(c.col);
}

// Maps p to the cell of a uniform local grid anchored at origin. Cells are
// half-open squares of side cell_km, so boundary points land in the
// higher-index cell. Throws std::out_of_range if p lies south or west of
// origin, std::invalid_argument if cell_km <= 0.
GridCell to_cell(const GeoPoint& p, const GeoPoint& origin, double cell_km);

GeoPoint cell_center(const GridCell& c, const GeoPoint& origin, double cell_km);

}  // namespace rs

template <>
struct std::hash<rs::GridCell> {
  std::size_t operator()(const rs::GridCell& c) const noexcept {
    return std::hash<std::uint64_t>{}(rs::pack(c));
  }
};
