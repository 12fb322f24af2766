#include "rs/enroute.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "json.hpp"

namespace rs {

namespace {
thread_local std::size_t g_last_sweeps = 0;
}

std::size_t enroute_last_sweeps() { return g_last_sweeps; }

RouteGrid make_route_grid(const BoundingBox& box, double cell_km) {
  if (cell_km <= 0.0) throw std::invalid_argument("make_route_grid: cell_km must be positive");
  RouteGrid g;
  g.origin = box.min;
  g.cell_km = cell_km;
  const GridCell far = to_cell(box.max, box.min, cell_km);
  g.rows = far.row + 2;
  g.cols = far.col + 2;
  return g;
}

Route compute_route(const GeoPoint& home, const GeoPoint& work, const RouteGrid& grid) {
  const GridCell start = grid.cell_of(home);
  const GridCell goal = grid.cell_of(work);
  if (!grid.contains(start) || !grid.contains(goal))
    throw RoutingError("compute_route: endpoint outside grid or blocked");

  // BFS from the goal, then walk from the start picking the smallest
  // (row, col) neighbor that still shrinks the distance.
  std::vector<int> dist(static_cast<std::size_t>(grid.rows) * grid.cols, -1);
  auto at = [&](const GridCell& c) -> int& {
    return dist[static_cast<std::size_t>(c.row) * grid.cols + c.col];
  };
  std::queue<GridCell> frontier;
  at(goal) = 0;
  frontier.push(goal);
  const int dr[4] = {-1, 0, 0, 1};
  const int dc[4] = {0, -1, 1, 0};
  while (!frontier.empty()) {
    const GridCell cur = frontier.front();
    frontier.pop();
    for (int k = 0; k < 4; ++k) {
      const GridCell nxt{cur.row + dr[k], cur.col + dc[k]};
      if (!grid.contains(nxt) || at(nxt) >= 0) continue;
      at(nxt) = at(cur) + 1;
      frontier.push(nxt);
    }
  }
  if (at(start) < 0) throw RoutingError("compute_route: work cell unreachable from home");

  Route route;
  GridCell cur = start;
  route.cells.push_back(cur);
  while (cur != goal) {
    GridCell best{INT32_MAX, INT32_MAX};
    for (int k = 0; k < 4; ++k) {
      const GridCell nxt{cur.row + dr[k], cur.col + dc[k]};
      if (grid.contains(nxt) && at(nxt) == at(cur) - 1 && nxt < best) best = nxt;
    }
    route.length_km += distance_km(grid.center(cur), grid.center(best));
    cur = best;
    route.cells.push_back(cur);
  }
  return route;
}

namespace {

// Distance from a point to the nearest edge of a cell's rectangle, in the
// grid's local planar frame. Zero when the point lies inside the cell.
double cell_distance_km(const GeoPoint& p, const GridCell& c, const RouteGrid& grid) {
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double north = (p.lat - grid.origin.lat) * kKmPerDegree;
  const double east =
      (p.lon - grid.origin.lon) * kKmPerDegree * std::cos(grid.origin.lat * kDegToRad);
  const double lo_n = c.row * grid.cell_km, hi_n = (c.row + 1) * grid.cell_km;
  const double lo_e = c.col * grid.cell_km, hi_e = (c.col + 1) * grid.cell_km;
  const double dn = north < lo_n ? lo_n - north : (north > hi_n ? north - hi_n : 0.0);
  const double de = east < lo_e ? lo_e - east : (east > hi_e ? east - hi_e : 0.0);
  return std::hypot(dn, de);
}

}  // namespace

bool can_pick_up(const Route& driver_route, const Commuter& driver,
                 const Commuter& passenger, const MatchConstraints& c,
                 const RouteGrid& grid) {
  if (!time_social_feasible(driver, passenger, c)) return false;
  std::size_t first_home = driver_route.cells.size();
  for (std::size_t i = 0; i < driver_route.cells.size(); ++i) {
    if (cell_distance_km(passenger.home, driver_route.cells[i], grid) <= c.delta_km) {
      first_home = i;
      break;
    }
  }
  if (first_home == driver_route.cells.size()) return false;
  for (std::size_t j = first_home; j < driver_route.cells.size(); ++j)
    if (cell_distance_km(passenger.work, driver_route.cells[j], grid) <= c.delta_km)
      return true;
  return false;
}

namespace {

struct Cars {
  // driver id -> members (including the driver), kept sorted
  std::map<std::uint64_t, std::vector<std::uint64_t>> members;
  std::unordered_map<std::uint64_t, std::uint64_t> assigned;

  static Cars from(const Assignment& a) {
    Cars cars;
    cars.assigned = a.assigned;
    for (const auto& [v, d] : a.assigned) cars.members[d].push_back(v);
    for (auto& [d, m] : cars.members) std::sort(m.begin(), m.end());
    return cars;
  }

  Assignment to_assignment() const {
    Assignment a;
    for (const auto& [d, m] : members) a.drivers.push_back(d);
    a.assigned = assigned;
    return a;
  }
};

std::unordered_set<GridCell> dilate_route(const Route& route, int radius) {
  std::unordered_set<GridCell> out;
  for (const GridCell& c : route.cells)
    for (int dr = -radius; dr <= radius; ++dr)
      for (int dc = -radius; dc <= radius; ++dc)
        out.insert(GridCell{c.row + dr, c.col + dc});
  return out;
}

}  // namespace

Assignment enroute_solve(const Assignment& a0, const PopulationIndex& idx,
                         const MatchConstraints& c, const RouteGrid& grid,
                         const EnrouteParams& params) {
  Cars cars = Cars::from(a0);
  const std::size_t sweep_cap =
      params.max_sweeps > 0 ? params.max_sweeps : a0.car_count() * 4;

  // routes depend only on the driver's endpoints; cache across sweeps
  std::unordered_map<std::uint64_t, Route> route_cache;
  auto route_of = [&](std::uint64_t driver) -> const Route& {
    auto it = route_cache.find(driver);
    if (it == route_cache.end()) {
      const Commuter& d = idx.by_id(driver);
      it = route_cache.emplace(driver, compute_route(d.home, d.work, grid)).first;
    }
    return it->second;
  };

  std::unordered_map<std::uint64_t, GridCell> home_cell;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (cars.assigned.count(idx.at(i).id))
      home_cell.emplace(idx.at(i).id, grid.cell_of(idx.at(i).home));

  const int dilation = static_cast<int>(
      std::ceil((c.delta_km + grid.cell_km * 0.7072) / grid.cell_km));

  g_last_sweeps = 0;
  bool changed = true;
  while (changed && g_last_sweeps < sweep_cap) {
    changed = false;
    ++g_last_sweeps;

    // non-full cars, largest first, ties by driver id
    std::vector<std::uint64_t> order;
    for (const auto& [d, m] : cars.members)
      if (static_cast<int>(m.size()) < idx.by_id(d).capacity) order.push_back(d);
    std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
      const std::size_t oa = cars.members.at(a).size();
      const std::size_t ob = cars.members.at(b).size();
      if (oa != ob) return oa > ob;
      return a < b;
    });

    for (std::size_t pi = 0; pi < order.size(); ++pi) {
      const std::uint64_t v = order[pi];
      auto vit = cars.members.find(v);
      if (vit == cars.members.end()) continue;  // deleted earlier this sweep
      const Commuter& vdriver = idx.by_id(v);
      if (static_cast<int>(vit->second.size()) >= vdriver.capacity) continue;

      const Route& route = route_of(v);
      const auto reach = dilate_route(route, dilation);

      for (std::size_t pj = pi + 1; pj < order.size(); ++pj) {
        const std::uint64_t w = order[pj];
        auto wit = cars.members.find(w);
        if (wit == cars.members.end()) continue;

        while (true) {
          const int occ_v = static_cast<int>(vit->second.size());
          const int occ_w = static_cast<int>(wit->second.size());
          if (occ_v >= vdriver.capacity) break;
          const bool richer = params.strict_richer ? occ_v > occ_w : occ_v >= occ_w;
          if (!richer || occ_w == 0) break;

          // passengers are stealable; the driver only when driving alone
          std::uint64_t stolen = 0;
          bool found = false;
          for (std::uint64_t p : wit->second) {
            if (p == w && occ_w > 1) continue;
            if (!reach.count(home_cell.at(p))) continue;
            if (can_pick_up(route, vdriver, idx.by_id(p), c, grid)) {
              stolen = p;
              found = true;
              break;
            }
          }
          if (!found) break;

          auto& wm = wit->second;
          wm.erase(std::find(wm.begin(), wm.end(), stolen));
          vit->second.insert(
              std::lower_bound(vit->second.begin(), vit->second.end(), stolen), stolen);
          cars.assigned[stolen] = v;
          changed = true;
          if (wm.empty()) {
            cars.members.erase(wit);
            break;
          }
        }
        if (static_cast<int>(vit->second.size()) >= vdriver.capacity) break;
      }
    }
  }
  return cars.to_assignment();
}

void validate_enroute(const Assignment& a, const PopulationIndex& idx,
                      const MatchConstraints& c, const RouteGrid& grid) {
  std::set<std::uint64_t> driver_set(a.drivers.begin(), a.drivers.end());
  if (a.assigned.size() != idx.size())
    throw std::runtime_error("validate_enroute: assignment does not cover population");
  std::unordered_map<std::uint64_t, Route> routes;
  std::unordered_map<std::uint64_t, int> occ;
  for (const auto& [v, d] : a.assigned) {
    if (!driver_set.count(d))
      throw std::runtime_error("validate_enroute: assigned to a non-driver");
    occ[d]++;
    if (v == d) continue;
    auto it = routes.find(d);
    if (it == routes.end()) {
      const Commuter& drv = idx.by_id(d);
      it = routes.emplace(d, compute_route(drv.home, drv.work, grid)).first;
    }
    if (!can_pick_up(it->second, idx.by_id(d), idx.by_id(v), c, grid))
      throw std::runtime_error("validate_enroute: pickup not covered by route");
  }
  for (std::uint64_t d : a.drivers) {
    if (!a.assigned.count(d) || a.assigned.at(d) != d)
      throw std::runtime_error("validate_enroute: driver not self-assigned");
    if (occ[d] > idx.by_id(d).capacity)
      throw std::runtime_error("validate_enroute: capacity exceeded");
  }
}

double savings_report(std::size_t cars_before, const Assignment& a_end) {
  return success_ratio(cars_before, a_end.car_count());
}

std::string enroute_assignment_to_json(const Assignment& a, const MatchConstraints& c,
                                       const PopulationIndex& idx, const RouteGrid& grid) {
  nlohmann::json j = nlohmann::json::parse(assignment_to_json(a, c, CostBreakdown{
      0.0, 0.0, a.car_count()}));
  nlohmann::json routes = nlohmann::json::object();
  for (std::uint64_t d : a.drivers) {
    const Commuter& drv = idx.by_id(d);
    const Route r = compute_route(drv.home, drv.work, grid);
    nlohmann::json cells = nlohmann::json::array();
    for (const GridCell& cell : r.cells) cells.push_back({cell.row, cell.col});
    routes[std::to_string(d)] = std::move(cells);
  }
  j["routes"] = std::move(routes);
  return j.dump(2);
}

}  // namespace rs
