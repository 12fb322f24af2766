#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "rs/endpoints.hpp"

namespace {

// commuters placed by local east/north offsets (km) from a fixed anchor
constexpr double kAnchorLat = 40.40;
constexpr double kAnchorLon = -3.70;

rs::GeoPoint at_km(double east, double north) {
  constexpr double d2r = 3.14159265358979323846 / 180.0;
  return {kAnchorLat + north / rs::kKmPerDegree,
          kAnchorLon + east / (rs::kKmPerDegree * std::cos(kAnchorLat * d2r))};
}

rs::Commuter make(std::uint64_t id, double home_east, double home_north, double work_east,
                  double work_north, double lh = 540, double lw = 1020) {
  rs::Commuter u;
  u.id = id;
  u.home = at_km(home_east, home_north);
  u.work = at_km(work_east, work_north);
  u.leave_home = lh;
  u.leave_work = lw;
  return u;
}

// n commuters sharing one home/work pair (pairwise distance 0)
std::vector<rs::Commuter> clones(std::size_t n) {
  std::vector<rs::Commuter> v;
  for (std::size_t i = 1; i <= n; ++i) v.push_back(make(i, 0, 0, 5, 0));
  return v;
}

std::vector<rs::Commuter> random_instance(std::size_t n, std::mt19937_64& rng,
                                          double span_km = 4.0) {
  std::uniform_real_distribution<double> pos(0.0, span_km);
  std::uniform_real_distribution<double> dep(-30.0, 30.0);
  std::vector<rs::Commuter> v;
  for (std::size_t i = 1; i <= n; ++i)
    v.push_back(make(i, pos(rng), pos(rng), pos(rng) + span_km, pos(rng), 540 + dep(rng),
                     1020 + dep(rng)));
  return v;
}

}  // namespace

TEST_CASE("virtual distance") {
  const rs::MatchConstraints c{1.0, 10.0};
  const auto a = make(1, 0, 0, 5, 0);

  SUBCASE("self distance is zero") {
    CHECK(rs::virtual_distance(a, a, c) == doctest::Approx(0.0));
  }
  SUBCASE("homes 0.5 km apart, works colocated") {
    const auto b = make(2, 0.5, 0, 5, 0);
    const auto d = rs::virtual_distance(a, b, c);
    REQUIRE(d.has_value());
    CHECK(*d == doctest::Approx(0.5).epsilon(0.001));
  }
  SUBCASE("homes too far") {
    const auto b = make(2, 1.5, 0, 5, 0);
    CHECK_FALSE(rs::virtual_distance(a, b, c).has_value());
  }
  SUBCASE("works too far") {
    const auto b = make(2, 0, 0, 6.5, 0);
    CHECK_FALSE(rs::virtual_distance(a, b, c).has_value());
  }
  SUBCASE("time window") {
    const auto b = make(2, 0.2, 0, 5, 0, 551, 1020);  // |LH diff| = 11 > tau
    CHECK_FALSE(rs::virtual_distance(a, b, c).has_value());
    const auto b2 = make(2, 0.2, 0, 5, 0, 550, 1010);  // both diffs exactly tau
    CHECK(rs::virtual_distance(a, b2, c).has_value());
  }
  SUBCASE("unbounded tau skips the time check") {
    rs::MatchConstraints cu{1.0, rs::kUnboundedTau};
    const auto b = make(2, 0.2, 0, 5, 0, 100, 1400);
    CHECK(rs::virtual_distance(a, b, cu).has_value());
  }
  SUBCASE("symmetric") {
    std::mt19937_64 rng(3);
    const auto pop = random_instance(12, rng);
    for (const auto& u : pop)
      for (const auto& v : pop) {
        const auto duv = rs::virtual_distance(u, v, c);
        const auto dvu = rs::virtual_distance(v, u, c);
        CHECK(duv.has_value() == dvu.has_value());
        if (duv) CHECK(*duv == doctest::Approx(*dvu));
      }
  }
  SUBCASE("social filter") {
    const std::vector<std::pair<std::uint64_t, std::uint64_t>> edges = {{1, 2}, {2, 3}};
    const auto g = rs::SocialGraph::from_edges(edges);
    rs::MatchConstraints cs{1.0, 10.0, 1, &g};
    const auto b = make(2, 0.2, 0, 5, 0);
    const auto d3 = make(3, 0.2, 0, 5, 0);
    CHECK(rs::virtual_distance(a, b, cs).has_value());
    CHECK_FALSE(rs::virtual_distance(a, d3, cs).has_value());  // 2 hops
    cs.social_hops = 2;
    CHECK(rs::virtual_distance(a, d3, cs).has_value());
    const auto d9 = make(9, 0.2, 0, 5, 0);  // not in the graph at all
    CHECK_FALSE(rs::virtual_distance(a, d9, cs).has_value());
    rs::MatchConstraints broken{1.0, 10.0, 1, nullptr};
    CHECK_THROWS(rs::virtual_distance(a, b, broken));
  }
}

TEST_CASE("penalty dominates any distance sum") {
  const rs::MatchConstraints c{1.0, 10.0};
  rs::Commuter v = make(1, 0, 0, 5, 0);
  CHECK(rs::penalty(v, c) == doctest::Approx(8.001));
  // a full car of 4 accumulates at most 3 * 2delta of pickup distance,
  // strictly below one extra driver's penalty
  CHECK(3 * 2 * c.delta_km < rs::penalty(v, c));
}

TEST_CASE("options and ordering") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};
  // 1 and 2 mutually feasible; 3 isolated far away
  std::vector<rs::Commuter> pop = {make(1, 0, 0, 5, 0), make(2, 0.5, 0, 5.5, 0),
                                   make(3, 20, 20, 30, 20)};
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);

  CHECK(rs::options(idx.by_id(1), idx, c) == std::vector<std::uint64_t>{2});
  CHECK(rs::options(idx.by_id(3), idx, c).empty());
  CHECK(rs::option_count(idx.by_id(2), idx, c) == 1);

  // symmetry of the option relation on random instances
  std::mt19937_64 rng(5);
  const auto rnd = random_instance(30, rng);
  rs::PopulationIndex ridx({rnd.data(), rnd.size()}, c.delta_km);
  for (const auto& u : rnd) {
    const auto opts = rs::options(u, idx, c);
    CHECK(std::is_sorted(opts.begin(), opts.end()));
    for (const auto& v : rnd) {
      const bool uv = rs::virtual_distance(u, v, c).has_value();
      CHECK(uv == rs::virtual_distance(v, u, c).has_value());
    }
  }

  // scarcity ordering: fewest options first, ties by id
  const auto order = rs::global_ordering(idx, c);
  REQUIRE(order.size() == 3);
  CHECK(idx.at(order[0]).id == 3);  // 0 options
  CHECK(idx.at(order[1]).id == 1);  // 1 option, smaller id
  CHECK(idx.at(order[2]).id == 2);
}

TEST_CASE("grid bucketing matches brute force") {
  const rs::MatchConstraints c{0.7, rs::kUnboundedTau};
  std::mt19937_64 rng(8);
  const auto pop = random_instance(150, rng, 6.0);
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
  for (const auto& u : pop) {
    std::vector<std::uint64_t> brute;
    for (const auto& v : pop)
      if (u.id != v.id && rs::virtual_distance(u, v, c)) brute.push_back(v.id);
    std::sort(brute.begin(), brute.end());
    CHECK(rs::options(u, idx, c) == brute);
  }
}

TEST_CASE("b-matching on clone groups") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};

  SUBCASE("two clones share one car") {
    const auto pop = clones(2);
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto a = rs::b_matching_init(idx, c);
    CHECK(a.car_count() == 1);
    rs::validate_assignment(a, idx, c);
  }
  SUBCASE("four clones fill one car") {
    const auto pop = clones(4);
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto a = rs::b_matching_init(idx, c);
    CHECK(a.car_count() == 1);
    const auto cost = rs::total_cost(a, idx, c);
    CHECK(cost.distance_cost == doctest::Approx(0.0));
    CHECK(cost.penalty_cost == doctest::Approx(8.001));
  }
  SUBCASE("five clones need two cars") {
    const auto pop = clones(5);
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto a = rs::b_matching_init(idx, c);
    CHECK(a.car_count() == 2);
    rs::validate_assignment(a, idx, c);
  }
  SUBCASE("isolated commuter drives alone") {
    std::vector<rs::Commuter> pop = clones(2);
    pop.push_back(make(9, 50, 50, 60, 50));
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto a = rs::b_matching_init(idx, c);
    CHECK(a.car_count() == 2);
    CHECK(a.assigned.at(9) == 9);
  }
}

TEST_CASE("transportation subproblem") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};

  SUBCASE("2x2 diagonal is optimal") {
    // drivers at 0 and 3 km east; passengers at 0.2 and 3.2: the identity
    // assignment costs 0.4, the crossed one is infeasible (distance > delta)
    std::vector<rs::Commuter> pop = {make(1, 0, 0, 10, 0), make(2, 3, 0, 13, 0),
                                     make(3, 0.2, 0, 10.2, 0), make(4, 3.2, 0, 13.2, 0)};
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto m = rs::solve_transportation({{1, 3}, {2, 3}}, {3, 4}, idx, c);
    CHECK(m.at(3) == 1);
    CHECK(m.at(4) == 2);
  }
  SUBCASE("cheaper driver wins when both fit") {
    std::vector<rs::Commuter> pop = {make(1, 0, 0, 10, 0), make(2, 0.8, 0, 10.8, 0),
                                     make(3, 0.1, 0, 10.1, 0)};
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto m = rs::solve_transportation({{1, 3}, {2, 3}}, {3}, idx, c);
    CHECK(m.at(3) == 1);  // 0.2 total vs 1.4
  }
  SUBCASE("capacity forces a split") {
    const auto pop = clones(3);
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto m = rs::solve_transportation({{1, 1}, {2, 1}}, {2, 3}, idx, c);
    CHECK(m.size() == 2);
    CHECK(m.at(2) != m.at(3));
  }
  SUBCASE("unplaceable passenger reported") {
    std::vector<rs::Commuter> pop = clones(2);
    pop.push_back(make(9, 50, 50, 60, 50));
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    try {
      rs::solve_transportation({{1, 3}}, {2, 9}, idx, c);
      FAIL("expected TransportError");
    } catch (const rs::TransportError& e) {
      REQUIRE(e.unplaceable.size() == 1);
      CHECK(e.unplaceable[0] == 9);
    }
  }
}

TEST_CASE("local search closes redundant cars") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};
  // three clones: optimum is one car; feed local search a 2-car start
  const auto pop = clones(3);
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
  rs::Assignment a0;
  a0.drivers = {1, 2};
  a0.assigned = {{1, 1}, {2, 2}, {3, 1}};
  const auto a1 = rs::local_search_improve(a0, idx, c, 16, 50, 7);
  CHECK(a1.car_count() == 1);
  rs::validate_assignment(a1, idx, c);
  CHECK(rs::total_cost(a1, idx, c).total() <= rs::total_cost(a0, idx, c).total());

  // zero iterations returns the input unchanged
  const auto same = rs::local_search_improve(a0, idx, c, 16, 0, 7);
  CHECK(same.car_count() == a0.car_count());
}

TEST_CASE("local search never increases cost") {
  const rs::MatchConstraints c{1.0, 10.0};
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pop = random_instance(40, rng, 3.0);
    rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
    const auto a0 = rs::b_matching_init(idx, c);
    const auto a1 = rs::local_search_improve(a0, idx, c, 16, 25, trial);
    rs::validate_assignment(a1, idx, c);
    CHECK(rs::total_cost(a1, idx, c).total() <=
          rs::total_cost(a0, idx, c).total() + 1e-9);
    CHECK(a1.car_count() <= a0.car_count());
  }
}

TEST_CASE("cost and success arithmetic") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};
  const auto pop = clones(1);
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
  rs::Assignment solo;
  solo.drivers = {1};
  solo.assigned = {{1, 1}};
  const auto cost = rs::total_cost(solo, idx, c);
  CHECK(cost.penalty_cost == doctest::Approx(8.001));
  CHECK(cost.distance_cost == doctest::Approx(0.0));
  CHECK(cost.total() == doctest::Approx(8.001));

  CHECK(rs::success_ratio(4, 1) == doctest::Approx(75.0));
  CHECK(rs::success_ratio(100, 41) == doctest::Approx(59.0));
  CHECK(rs::success_ratio(7, 7) == doctest::Approx(0.0));
  CHECK_THROWS(rs::success_ratio(0, 0));
}

TEST_CASE("tighter upper bound") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};
  // 8 clones plus 12 isolated: matchable fraction 40%, bound
  // (20 - (ceil(8/4) + 12)) / 20 = 30%
  std::vector<rs::Commuter> pop = clones(8);
  for (std::uint64_t i = 0; i < 12; ++i)
    pop.push_back(make(100 + i, 40 + 10 * i, 0, 60 + 10 * i, 0));
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
  CHECK(rs::tighter_upper_bound(idx, c) == doctest::Approx(30.0));

  // all-clone population hits the absolute cap
  const auto all = clones(16);
  rs::PopulationIndex aidx({all.data(), all.size()}, c.delta_km);
  CHECK(rs::tighter_upper_bound(aidx, c) == doctest::Approx(75.0));
}

TEST_CASE("brute force oracle") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};
  const auto pop = clones(6);
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
  const auto opt = rs::brute_force_optimal(idx, c);
  CHECK(opt.car_count() == 2);
  rs::validate_assignment(opt, idx, c);

  const auto big = clones(13);
  rs::PopulationIndex bidx({big.data(), big.size()}, c.delta_km);
  CHECK_THROWS(rs::brute_force_optimal(bidx, c));
}

TEST_CASE("validator catches violations") {
  const rs::MatchConstraints c{1.0, rs::kUnboundedTau};
  const auto pop = clones(5);
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);

  rs::Assignment over;
  over.drivers = {1};
  over.assigned = {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {5, 1}};  // 5 in a car of 4
  CHECK_THROWS(rs::validate_assignment(over, idx, c));

  rs::Assignment dangling;
  dangling.drivers = {1, 5};
  dangling.assigned = {{1, 1}, {2, 1}, {3, 1}, {4, 2}, {5, 5}};  // 2 is not a driver
  CHECK_THROWS(rs::validate_assignment(dangling, idx, c));

  rs::Assignment missing;
  missing.drivers = {1};
  missing.assigned = {{1, 1}, {2, 1}, {3, 1}, {4, 1}};  // 5 unassigned
  CHECK_THROWS(rs::validate_assignment(missing, idx, c));
}

TEST_CASE("assignment JSON round trip") {
  const rs::MatchConstraints c{1.0, 10.0};
  std::mt19937_64 rng(31);
  const auto pop = random_instance(25, rng, 2.0);
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
  const auto a = rs::endpoints_solve(idx, c, {16, 20, 1});
  const auto text = rs::assignment_to_json(a, c, rs::total_cost(a, idx, c));
  const auto back = rs::assignment_from_json(text);
  CHECK(back.drivers == a.drivers);
  CHECK(back.assigned.size() == a.assigned.size());
  for (const auto& [v, d] : a.assigned) CHECK(back.assigned.at(v) == d);
}

TEST_CASE("endpoints solver is deterministic in the seed") {
  const rs::MatchConstraints c{1.0, 10.0};
  std::mt19937_64 rng(41);
  const auto pop = random_instance(120, rng, 3.0);
  rs::PopulationIndex idx({pop.data(), pop.size()}, c.delta_km);
  const auto a = rs::endpoints_solve(idx, c, {32, 30, 99});
  const auto b = rs::endpoints_solve(idx, c, {32, 30, 99});
  CHECK(a.drivers == b.drivers);
  for (const auto& [v, d] : a.assigned) CHECK(b.assigned.at(v) == d);
}
