#include "rs/endpoints.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "json.hpp"

namespace rs {

namespace {

// chunked parallel map over [0, n); falls back to serial for small n
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (n < 4096 || hw == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (n + hw - 1) / hw;
  for (std::size_t t = 0; t < hw; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &f] {
      for (std::size_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

double penalty(const Commuter& v, const MatchConstraints& c) {
  return 2.0 * c.delta_km * v.capacity + c.penalty_epsilon_km;
}

bool time_social_feasible(const Commuter& u, const Commuter& v, const MatchConstraints& c) {
  if (std::abs(u.leave_home - v.leave_home) > c.tau_min) return false;
  if (std::abs(u.leave_work - v.leave_work) > c.tau_min) return false;
  if (c.social_hops > 0) {
    if (c.social_graph == nullptr)
      throw std::invalid_argument("MatchConstraints: social filter without a graph");
    if (!c.social_graph->within_k_hops(u.id, v.id, c.social_hops)) return false;
  }
  return true;
}

std::optional<double> virtual_distance(const Commuter& u, const Commuter& v,
                                       const MatchConstraints& c) {
  if (u.id == v.id) return 0.0;
  const double h = distance_km(u.home, v.home);
  if (h > c.delta_km) return std::nullopt;
  const double w = distance_km(u.work, v.work);
  if (w > c.delta_km) return std::nullopt;
  if (!time_social_feasible(u, v, c)) return std::nullopt;
  return h + w;
}

std::unordered_map<std::uint64_t, int> Assignment::occupancy() const {
  std::unordered_map<std::uint64_t, int> occ;
  for (std::uint64_t d : drivers) occ[d] = 0;
  for (const auto& [v, d] : assigned) occ[d]++;
  return occ;
}

PopulationIndex::PopulationIndex(std::span<const Commuter> commuters, double delta_km)
    : commuters_(commuters.begin(), commuters.end()),
      cell_km_(std::max(delta_km, 0.05)) {
  if (commuters_.empty())
    throw std::invalid_argument("PopulationIndex: empty population");
  origin_ = GeoPoint{90.0, 180.0};
  for (const auto& c : commuters_) {
    origin_.lat = std::min(origin_.lat, c.home.lat);
    origin_.lon = std::min(origin_.lon, c.home.lon);
  }
  for (std::size_t i = 0; i < commuters_.size(); ++i) {
    if (!id_to_index_.emplace(commuters_[i].id, i).second)
      throw std::invalid_argument("PopulationIndex: duplicate commuter id");
    buckets_[pack(to_cell(commuters_[i].home, origin_, cell_km_))].push_back(i);
  }
}

const Commuter& PopulationIndex::by_id(std::uint64_t id) const {
  auto it = id_to_index_.find(id);
  if (it == id_to_index_.end())
    throw std::out_of_range("PopulationIndex: unknown commuter id");
  return commuters_[it->second];
}

std::vector<std::size_t> PopulationIndex::nearby(const Commuter& v) const {
  const GridCell c = to_cell(v.home, origin_, cell_km_);
  std::vector<std::size_t> out;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const GridCell n{c.row + dr, c.col + dc};
      if (n.row < 0 || n.col < 0) continue;
      auto it = buckets_.find(pack(n));
      if (it == buckets_.end()) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

std::vector<std::uint64_t> options(const Commuter& v, const PopulationIndex& idx,
                                   const MatchConstraints& c) {
  std::vector<std::uint64_t> out;
  for (std::size_t j : idx.nearby(v)) {
    const Commuter& u = idx.at(j);
    if (u.id == v.id) continue;
    if (virtual_distance(u, v, c)) out.push_back(u.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t option_count(const Commuter& v, const PopulationIndex& idx,
                         const MatchConstraints& c) {
  std::size_t n = 0;
  for (std::size_t j : idx.nearby(v)) {
    const Commuter& u = idx.at(j);
    if (u.id != v.id && virtual_distance(u, v, c)) ++n;
  }
  return n;
}

namespace {

bool has_option(const Commuter& v, const PopulationIndex& idx, const MatchConstraints& c) {
  for (std::size_t j : idx.nearby(v)) {
    const Commuter& u = idx.at(j);
    if (u.id != v.id && virtual_distance(u, v, c)) return true;
  }
  return false;
}

}  // namespace

std::vector<std::size_t> global_ordering(const PopulationIndex& idx,
                                         const MatchConstraints& c) {
  std::vector<std::size_t> counts(idx.size());
  parallel_for(idx.size(), [&](std::size_t i) { counts[i] = option_count(idx.at(i), idx, c); });
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] < counts[b];
    return idx.at(a).id < idx.at(b).id;
  });
  return order;
}

Assignment b_matching_init(const PopulationIndex& idx, const MatchConstraints& c) {
  const auto order = global_ordering(idx, c);
  std::vector<bool> matched(idx.size(), false);
  Assignment a;

  for (std::size_t i : order) {
    if (matched[i]) continue;
    const Commuter& hub = idx.at(i);

    // nearest unmatched options of the hub, up to capacity-1 of them
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j : idx.nearby(hub)) {
      if (j == i || matched[j]) continue;
      if (auto d = virtual_distance(idx.at(j), hub, c))
        cand.emplace_back(*d, j);
    }
    std::sort(cand.begin(), cand.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first < y.first;
      return idx.at(x.second).id < idx.at(y.second).id;
    });

    std::vector<std::size_t> group{i};
    for (const auto& [d, j] : cand) {
      if (group.size() >= static_cast<std::size_t>(hub.capacity)) break;
      group.push_back(j);
    }

    // driver: can seat the whole group, all members feasible passengers of it,
    // fewest empty seats; the hub always qualifies
    std::size_t driver = i;
    int best_empty = hub.capacity - static_cast<int>(group.size());
    for (std::size_t m : group) {
      if (m == i) continue;
      const Commuter& cm = idx.at(m);
      if (cm.capacity < static_cast<int>(group.size())) continue;
      bool all_ok = true;
      for (std::size_t other : group)
        if (other != m && !virtual_distance(idx.at(other), cm, c)) { all_ok = false; break; }
      if (!all_ok) continue;
      const int empty = cm.capacity - static_cast<int>(group.size());
      if (empty < best_empty ||
          (empty == best_empty && cm.id < idx.at(driver).id))
        { driver = m; best_empty = empty; }
    }

    a.drivers.push_back(idx.at(driver).id);
    for (std::size_t m : group) {
      a.assigned[idx.at(m).id] = idx.at(driver).id;
      matched[m] = true;
    }
  }
  std::sort(a.drivers.begin(), a.drivers.end());
  return a;
}

TransportError::TransportError(std::vector<std::uint64_t> ids)
    : std::runtime_error("transportation subproblem infeasible for " +
                         std::to_string(ids.size()) + " passenger(s)"),
      unplaceable(std::move(ids)) {}

namespace {

// min-cost max-flow, SPFA-based successive shortest paths; double costs
class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : graph_(n) {}

  void add_edge(int from, int to, int cap, double cost) {
    graph_[from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, cap, cost});
    graph_[to].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0, -cost});
  }

  // returns (flow, cost)
  std::pair<int, double> run(int source, int sink) {
    int total_flow = 0;
    double total_cost = 0.0;
    const int n = static_cast<int>(graph_.size());
    while (true) {
      std::vector<double> dist(n, kInf);
      std::vector<int> in_edge(n, -1);
      std::vector<bool> in_queue(n, false);
      dist[source] = 0.0;
      std::deque<int> queue{source};
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        in_queue[u] = false;
        for (int eid : graph_[u]) {
          const Edge& e = edges_[eid];
          if (e.cap <= 0 || dist[u] + e.cost >= dist[e.to] - 1e-12) continue;
          dist[e.to] = dist[u] + e.cost;
          in_edge[e.to] = eid;
          if (!in_queue[e.to]) { queue.push_back(e.to); in_queue[e.to] = true; }
        }
      }
      if (in_edge[sink] < 0) break;
      int push = INT32_MAX;
      for (int v = sink; v != source;) {
        const Edge& e = edges_[in_edge[v]];
        push = std::min(push, e.cap);
        v = edges_[in_edge[v] ^ 1].to;
      }
      for (int v = sink; v != source;) {
        Edge& e = edges_[in_edge[v]];
        e.cap -= push;
        edges_[in_edge[v] ^ 1].cap += push;
        total_cost += push * e.cost;
        v = edges_[in_edge[v] ^ 1].to;
      }
      total_flow += push;
    }
    return {total_flow, total_cost};
  }

  int edge_flow(int eid) const { return edges_[2 * eid + 1].cap; }

 private:
  static constexpr double kInf = 1e300;
  struct Edge {
    int to;
    int cap;
    double cost;
  };
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> graph_;
};

}  // namespace

std::unordered_map<std::uint64_t, std::uint64_t> solve_transportation(
    const std::vector<TransportDriver>& open_drivers,
    const std::vector<std::uint64_t>& passengers, const PopulationIndex& idx,
    const MatchConstraints& c) {
  const int nd = static_cast<int>(open_drivers.size());
  const int np = static_cast<int>(passengers.size());
  // nodes: 0 source, 1..nd drivers, nd+1..nd+np passengers, nd+np+1 sink
  const int source = 0, sink = nd + np + 1;
  MinCostFlow flow(nd + np + 2);
  std::vector<std::uint64_t> no_driver;
  struct Arc { int driver, passenger; };
  std::vector<Arc> arcs;  // parallel to add_edge call order

  for (int d = 0; d < nd; ++d)
    flow.add_edge(source, 1 + d, open_drivers[d].residual_capacity, 0.0);
  for (int p = 0; p < np; ++p) {
    const Commuter& pc = idx.by_id(passengers[p]);
    bool any = false;
    for (int d = 0; d < nd; ++d) {
      const auto dist = virtual_distance(idx.by_id(open_drivers[d].id), pc, c);
      if (!dist) continue;
      arcs.push_back({d, p});
      flow.add_edge(1 + d, 1 + nd + p, 1, *dist);
      any = true;
    }
    if (!any) no_driver.push_back(passengers[p]);
  }
  if (!no_driver.empty()) throw TransportError(std::move(no_driver));
  for (int p = 0; p < np; ++p) flow.add_edge(1 + nd + p, sink, 1, 0.0);

  const auto [pushed, cost] = flow.run(source, sink);
  (void)cost;
  if (pushed != np) {
    // capacity shortfall: report passengers left unassigned
    std::vector<bool> placed(np, false);
    for (std::size_t k = 0; k < arcs.size(); ++k)
      if (flow.edge_flow(nd + static_cast<int>(k)) > 0) placed[arcs[k].passenger] = true;
    std::vector<std::uint64_t> left;
    for (int p = 0; p < np; ++p)
      if (!placed[p]) left.push_back(passengers[p]);
    throw TransportError(std::move(left));
  }

  std::unordered_map<std::uint64_t, std::uint64_t> out;
  for (std::size_t k = 0; k < arcs.size(); ++k)
    if (flow.edge_flow(nd + static_cast<int>(k)) > 0)
      out[passengers[arcs[k].passenger]] = open_drivers[arcs[k].driver].id;
  return out;
}

namespace {

// mutable solver state shared by local search steps
struct SolverState {
  std::set<std::uint64_t> drivers;
  std::unordered_map<std::uint64_t, std::uint64_t> assigned;
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> occupants;

  static SolverState from(const Assignment& a) {
    SolverState s;
    s.drivers.insert(a.drivers.begin(), a.drivers.end());
    s.assigned = a.assigned;
    for (const auto& [v, d] : a.assigned) s.occupants[d].push_back(v);
    for (auto& [d, occ] : s.occupants) std::sort(occ.begin(), occ.end());
    return s;
  }

  Assignment to_assignment() const {
    Assignment a;
    a.drivers.assign(drivers.begin(), drivers.end());
    a.assigned = assigned;
    return a;
  }
};

struct Candidate {
  double delta_cost = 0.0;
  std::uint64_t closed_driver = 0;
  std::optional<std::uint64_t> opened_driver;  // set for swaps
  std::unordered_map<std::uint64_t, std::uint64_t> reassigned;
};

// Transportation columns restricted to open drivers feasible for at least one
// of the persons being re-placed.
std::optional<std::unordered_map<std::uint64_t, std::uint64_t>> replace_persons(
    const std::vector<std::uint64_t>& persons,
    const std::unordered_map<std::uint64_t, int>& residuals, const PopulationIndex& idx,
    const MatchConstraints& c, double* cost_out) {
  std::set<std::uint64_t> involved;
  for (std::uint64_t p : persons) {
    const Commuter& pc = idx.by_id(p);
    bool any = false;
    for (std::size_t j : idx.nearby(pc)) {
      const std::uint64_t d = idx.at(j).id;
      auto it = residuals.find(d);
      if (it == residuals.end() || it->second <= 0) continue;
      if (virtual_distance(idx.at(j), pc, c)) { involved.insert(d); any = true; }
    }
    if (!any) return std::nullopt;
  }
  std::vector<TransportDriver> cols;
  for (std::uint64_t d : involved) cols.push_back({d, residuals.at(d)});
  try {
    auto placed = solve_transportation(cols, persons, idx, c);
    if (cost_out) {
      *cost_out = 0.0;
      for (const auto& [p, d] : placed)
        *cost_out += *virtual_distance(idx.by_id(d), idx.by_id(p), c);
    }
    return placed;
  } catch (const TransportError&) {
    return std::nullopt;
  }
}

}  // namespace

Assignment local_search_improve(const Assignment& a0, const PopulationIndex& idx,
                                const MatchConstraints& c, std::size_t neighborhood_size,
                                std::size_t max_iters, std::uint64_t seed) {
  SolverState state = SolverState::from(a0);
  std::mt19937_64 rng(seed);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // full cars stay as they are
    std::vector<std::uint64_t> unfrozen;
    for (std::uint64_t d : state.drivers) {
      const auto& occ = state.occupants[d];
      if (static_cast<int>(occ.size()) < idx.by_id(d).capacity) unfrozen.push_back(d);
    }
    if (unfrozen.empty()) break;

    std::vector<std::uint64_t> pool;  // unfrozen passengers, swap-in candidates
    for (std::uint64_t d : unfrozen)
      for (std::uint64_t v : state.occupants[d])
        if (v != d) pool.push_back(v);
    std::sort(pool.begin(), pool.end());

    // residual seats over unfrozen cars
    std::unordered_map<std::uint64_t, int> residuals;
    for (std::uint64_t d : unfrozen)
      residuals[d] = idx.by_id(d).capacity - static_cast<int>(state.occupants[d].size());

    std::optional<Candidate> best;
    for (std::size_t k = 0; k < neighborhood_size; ++k) {
      const std::uint64_t d = unfrozen[rng() % unfrozen.size()];
      const bool do_swap = !pool.empty() && (rng() % 2 == 0);
      std::optional<std::uint64_t> u;
      if (do_swap) {
        u = pool[rng() % pool.size()];
        if (*u == d || state.assigned.at(*u) == d) u.reset();  // same car, treat as closure
      }

      std::vector<std::uint64_t> persons = state.occupants.at(d);
      double removed = penalty(idx.by_id(d), c);
      for (std::uint64_t p : persons)
        if (p != d) removed += *virtual_distance(idx.by_id(d), idx.by_id(p), c);

      auto local_res = residuals;
      local_res.erase(d);
      double added = 0.0;
      if (u) {
        const std::uint64_t e = state.assigned.at(*u);
        removed += *virtual_distance(idx.by_id(e), idx.by_id(*u), c);
        local_res[e] += 1;
        local_res[*u] = idx.by_id(*u).capacity - 1;
        added += penalty(idx.by_id(*u), c);
      }

      double move_cost = 0.0;
      auto placed = replace_persons(persons, local_res, idx, c, &move_cost);
      if (!placed) continue;
      added += move_cost;

      const double delta = added - removed;
      if (delta < -1e-12 && (!best || delta < best->delta_cost))
        best = Candidate{delta, d, u, std::move(*placed)};
    }
    if (!best) break;

    // apply: close best->closed_driver, open the swap-in if any, re-place
    state.drivers.erase(best->closed_driver);
    state.occupants.erase(best->closed_driver);
    if (best->opened_driver) {
      const std::uint64_t u = *best->opened_driver;
      const std::uint64_t e = state.assigned.at(u);
      auto& eocc = state.occupants.at(e);
      eocc.erase(std::find(eocc.begin(), eocc.end(), u));
      state.drivers.insert(u);
      state.assigned[u] = u;
      state.occupants[u].push_back(u);
    }
    for (const auto& [p, d] : best->reassigned) {
      state.assigned[p] = d;
      auto& occ = state.occupants.at(d);
      occ.insert(std::lower_bound(occ.begin(), occ.end(), p), p);
    }
  }
  return state.to_assignment();
}

CostBreakdown total_cost(const Assignment& a, const PopulationIndex& idx,
                         const MatchConstraints& c) {
  CostBreakdown out;
  out.car_count = a.drivers.size();
  for (std::uint64_t d : a.drivers) out.penalty_cost += penalty(idx.by_id(d), c);
  for (const auto& [v, d] : a.assigned) {
    if (v == d) continue;
    const auto dist = virtual_distance(idx.by_id(d), idx.by_id(v), c);
    if (!dist)
      throw std::runtime_error("total_cost: infeasible driver-passenger pair");
    out.distance_cost += *dist;
  }
  return out;
}

double success_ratio(std::size_t cars_before, std::size_t cars_after) {
  if (cars_before == 0)
    throw std::invalid_argument("success_ratio: cars_before must be positive");
  return 100.0 * (static_cast<double>(cars_before) - static_cast<double>(cars_after)) /
         static_cast<double>(cars_before);
}

double tighter_upper_bound(const PopulationIndex& idx, const MatchConstraints& c) {
  std::vector<char> optioned(idx.size(), 0);
  parallel_for(idx.size(),
               [&](std::size_t i) { optioned[i] = has_option(idx.at(i), idx, c) ? 1 : 0; });
  const std::size_t m =
      static_cast<std::size_t>(std::count(optioned.begin(), optioned.end(), 1));
  const std::size_t cars = (m + 3) / 4 + (idx.size() - m);
  return success_ratio(idx.size(), cars);
}

Assignment brute_force_optimal(const PopulationIndex& idx, const MatchConstraints& c) {
  const std::size_t n = idx.size();
  if (n > 12) throw std::invalid_argument("brute_force_optimal: more than 12 commuters");

  double best_cost = std::numeric_limits<double>::infinity();
  Assignment best;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<TransportDriver> drivers;
    std::vector<std::uint64_t> passengers;
    double pen = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        drivers.push_back({idx.at(i).id, idx.at(i).capacity - 1});
        pen += penalty(idx.at(i), c);
      } else {
        passengers.push_back(idx.at(i).id);
      }
    }
    if (pen >= best_cost) continue;
    try {
      auto placed = solve_transportation(drivers, passengers, idx, c);
      double cost = pen;
      for (const auto& [p, d] : placed)
        cost += *virtual_distance(idx.by_id(d), idx.by_id(p), c);
      if (cost < best_cost - 1e-12) {
        best_cost = cost;
        best.drivers.clear();
        for (const auto& d : drivers) best.drivers.push_back(d.id);
        std::sort(best.drivers.begin(), best.drivers.end());
        best.assigned = placed;
        for (const auto& d : drivers) best.assigned[d.id] = d.id;
      }
    } catch (const TransportError&) {
      continue;
    }
  }
  if (!std::isfinite(best_cost))
    throw std::runtime_error("brute_force_optimal: no feasible assignment");
  return best;
}

void validate_assignment(const Assignment& a, const PopulationIndex& idx,
                         const MatchConstraints& c) {
  std::set<std::uint64_t> driver_set(a.drivers.begin(), a.drivers.end());
  if (driver_set.size() != a.drivers.size())
    throw std::runtime_error("validate: duplicate drivers");
  if (a.assigned.size() != idx.size())
    throw std::runtime_error("validate: assignment does not cover the population");
  std::unordered_map<std::uint64_t, int> occ;
  for (const auto& [v, d] : a.assigned) {
    idx.by_id(v);
    if (!driver_set.count(d))
      throw std::runtime_error("validate: assigned to a non-driver");
    if (driver_set.count(v) && v != d)
      throw std::runtime_error("validate: driver not assigned to self");
    if (!virtual_distance(idx.by_id(d), idx.by_id(v), c))
      throw std::runtime_error("validate: infeasible pair");
    occ[d]++;
  }
  for (std::uint64_t d : a.drivers) {
    if (!a.assigned.count(d) || a.assigned.at(d) != d)
      throw std::runtime_error("validate: driver not self-assigned");
    if (occ[d] > idx.by_id(d).capacity)
      throw std::runtime_error("validate: capacity exceeded");
  }
}

Assignment endpoints_solve(const PopulationIndex& idx, const MatchConstraints& c,
                           const EndpointsParams& params) {
  Assignment a = b_matching_init(idx, c);
  return local_search_improve(a, idx, c, params.neighborhood_size, params.max_iters,
                              params.seed);
}

std::string assignment_to_json(const Assignment& a, const MatchConstraints& c,
                               const CostBreakdown& cost) {
  nlohmann::json j;
  j["drivers"] = a.drivers;
  nlohmann::json assigned = nlohmann::json::object();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs(a.assigned.begin(),
                                                             a.assigned.end());
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [v, d] : pairs) assigned[std::to_string(v)] = std::to_string(d);
  j["assigned"] = std::move(assigned);
  j["constraints"]["delta_km"] = c.delta_km;
  if (std::isfinite(c.tau_min))
    j["constraints"]["tau_min"] = c.tau_min;
  else
    j["constraints"]["tau_min"] = nullptr;
  j["constraints"]["social_hops"] = c.social_hops;
  j["cost"]["penalty_cost"] = cost.penalty_cost;
  j["cost"]["distance_cost"] = cost.distance_cost;
  j["cost"]["car_count"] = cost.car_count;
  return j.dump(2);
}

Assignment assignment_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Assignment a;
  for (const auto& d : j.at("drivers")) a.drivers.push_back(d.get<std::uint64_t>());
  for (const auto& [v, d] : j.at("assigned").items())
    a.assigned[std::stoull(v)] = std::stoull(d.get<std::string>());
  return a;
}

}  // namespace rs
