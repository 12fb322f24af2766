#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "rs/endpoints.hpp"
#include "rs/geo.hpp"
#include "rs/population.hpp"

namespace rs {

struct RouteGrid {
  GeoPoint origin;
  double cell_km = 0.5;
  int rows = 0;
  int cols = 0;
  std::unordered_set<GridCell> blocked;

  bool contains(const GridCell& c) const {
    return c.row >= 0 && c.row < rows && c.col >= 0 && c.col < cols &&
           blocked.count(c) == 0;
  }
  GridCell cell_of(const GeoPoint& p) const { return to_cell(p, origin, cell_km); }
  GeoPoint center(const GridCell& c) const { return cell_center(c, origin, cell_km); }
};

// Grid covering the box with one cell of margin on the north/east side.
RouteGrid make_route_grid(const BoundingBox& box, double cell_km = 0.5);

struct Route {
  std::vector<GridCell> cells;  // home cell first, work cell last
  double length_km = 0.0;
};

struct RoutingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest 4-neighbor path; among equal-length paths, the lexicographically
// smallest (row, col) sequence. Throws RoutingError when unreachable.
Route compute_route(const GeoPoint& home, const GeoPoint& work, const RouteGrid& grid);

// True iff some route cell (as a region) lies within delta of the passenger's
// home, a later-or-equal cell lies within delta of the passenger's work, and the
// time/social constraints between driver and passenger hold.
bool can_pick_up(const Route& driver_route, const Commuter& driver,
                 const Commuter& passenger, const MatchConstraints& c,
                 const RouteGrid& grid);

struct EnrouteParams {
  // With the strict rule a routed car only steals from strictly smaller cars;
  // the relaxed default also lets it steal from equal-occupancy un-routed
  // cars, so identical solo commuters can merge.
  bool strict_richer = false;
  std::size_t max_sweeps = 0;  // 0 = initial car count * 4
};

// Iterative passenger stealing over the route grid; car count never grows.
Assignment enroute_solve(const Assignment& a0, const PopulationIndex& idx,
                         const MatchConstraints& c, const RouteGrid& grid,
                         const EnrouteParams& params = {});

// How many sweeps the last enroute_solve call needed (test/diagnostic hook).
std::size_t enroute_last_sweeps();

// Re-checks every driver-passenger pair of an en-route assignment against
// can_pick_up; throws std::runtime_error on violation.
void validate_enroute(const Assignment& a, const PopulationIndex& idx,
                      const MatchConstraints& c, const RouteGrid& grid);

double savings_report(std::size_t cars_before, const Assignment& a_end);

// Optional per-car route polylines next to the assignment JSON.
std::string enroute_assignment_to_json(const Assignment& a, const MatchConstraints& c,
                                       const PopulationIndex& idx, const RouteGrid& grid);

}  // namespace rs
