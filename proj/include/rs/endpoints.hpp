#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rs/population.hpp"
#include "rs/social.hpp"

namespace rs {

inline constexpr double kUnboundedTau = std::numeric_limits<double>::infinity();
inline constexpr double kAbsoluteBoundPercent = 75.0;

struct MatchConstraints {
  double delta_km = 1.0;          // delta
  double tau_min = kUnboundedTau; // tau, infinity = no time constraint
  int social_hops = 0;            // 0 = no filter, otherwise 1 or 2
  const SocialGraph* social_graph = nullptr;
  double penalty_epsilon_km = 0.001;  // epsilon in p(v) = 2*delta*c(v) + eps
};

// Driver penalty p(v); strictly exceeds 2*delta*c(v) so fewer cars always wins.
double penalty(const Commuter& v, const MatchConstraints& c);

// h(u,v)+w(u,v) when all of max(h,w) <= delta, |LH diff| <= tau,
// |LW diff| <= tau and the social filter hold; nullopt otherwise.
std::optional<double> virtual_distance(const Commuter& u, const Commuter& v,
                                       const MatchConstraints& c);

// True on the non-spatial constraints alone (time + social); the en-route
// matcher substitutes route proximity for the endpoint delta rule.
bool time_social_feasible(const Commuter& u, const Commuter& v, const MatchConstraints& c);

struct Assignment {
  std::vector<std::uint64_t> drivers;                      // S, sorted
  std::unordered_map<std::uint64_t, std::uint64_t> assigned;  // a(v); a(v)=v for v in S

  std::size_t car_count() const { return drivers.size(); }
  std::unordered_map<std::uint64_t, int> occupancy() const;
};

struct CostBreakdown {
  double penalty_cost = 0.0;   // P(S)
  double distance_cost = 0.0;  // D(S)
  std::size_t car_count = 0;
  double total() const { return penalty_cost + distance_cost; }
};

// Population with an id->index map and a delta-sized home-cell bucket grid so
// option queries only touch adjacent cells.
class PopulationIndex {
 public:
  PopulationIndex(std::span<const Commuter> commuters, double delta_km);

  const Commuter& by_id(std::uint64_t id) const;
  const Commuter& at(std::size_t i) const { return commuters_[i]; }
  std::size_t size() const { return commuters_.size(); }
  std::span<const Commuter> all() const { return {commuters_.data(), commuters_.size()}; }

  // Indices of commuters whose home cell is delta-adjacent to v's home cell
  // (includes v itself; callers filter).
  std::vector<std::size_t> nearby(const Commuter& v) const;

 private:
  std::vector<Commuter> commuters_;
  std::unordered_map<std::uint64_t, std::size_t> id_to_index_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;  // packed cell
  GeoPoint origin_;
  double cell_km_;
};

// {u != v : d(u,v) finite}, sorted by id.
std::vector<std::uint64_t> options(const Commuter& v, const PopulationIndex& idx,
                                   const MatchConstraints& c);
std::size_t option_count(const Commuter& v, const PopulationIndex& idx,
                         const MatchConstraints& c);

// Commuter indices sorted ascending by option count, ties by ascending id.
std::vector<std::size_t> global_ordering(const PopulationIndex& idx,
                                         const MatchConstraints& c);

// Greedy capacity-constrained grouping driven by the scarcity ordering.
Assignment b_matching_init(const PopulationIndex& idx, const MatchConstraints& c);

struct TransportError : std::runtime_error {
  explicit TransportError(std::vector<std::uint64_t> unplaceable);
  std::vector<std::uint64_t> unplaceable;
};

struct TransportDriver {
  std::uint64_t id = 0;
  int residual_capacity = 0;
};

// Exact min-cost assignment of unit passenger demands to driver capacities
// (successive shortest augmenting paths; integral at unit demand). Throws
// TransportError when some passenger fits no driver or capacity runs short.
std::unordered_map<std::uint64_t, std::uint64_t> solve_transportation(
    const std::vector<TransportDriver>& open_drivers,
    const std::vector<std::uint64_t>& passengers, const PopulationIndex& idx,
    const MatchConstraints& c);

// Random driver closures/swaps over the non-full cars; each candidate is
// costed by re-solving the affected transportation subproblem. Monotone
// non-increasing in P(S)+D(S).
Assignment local_search_improve(const Assignment& a0, const PopulationIndex& idx,
                                const MatchConstraints& c, std::size_t neighborhood_size,
                                std::size_t max_iters, std::uint64_t seed);

CostBreakdown total_cost(const Assignment& a, const PopulationIndex& idx,
                         const MatchConstraints& c);

double success_ratio(std::size_t cars_before, std::size_t cars_after);

// Success if every commuter with >= 1 option rode in a full car of 4.
double tighter_upper_bound(const PopulationIndex& idx, const MatchConstraints& c);

// Exhaustive oracle for tests; refuses more than 12 commuters.
Assignment brute_force_optimal(const PopulationIndex& idx, const MatchConstraints& c);

// Throws std::runtime_error on any capacity / feasibility / self-assignment
// violation.
void validate_assignment(const Assignment& a, const PopulationIndex& idx,
                         const MatchConstraints& c);

struct EndpointsParams {
  std::size_t neighborhood_size = 32;
  std::size_t max_iters = 50;
  std::uint64_t seed = 0;
};

// b-matching init followed by local search.
Assignment endpoints_solve(const PopulationIndex& idx, const MatchConstraints& c,
                           const EndpointsParams& params = {});

std::string assignment_to_json(const Assignment& a, const MatchConstraints& c,
                               const CostBreakdown& cost);
Assignment assignment_from_json(const std::string& text);

}  // namespace rs
