#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "rs/cdr.hpp"

namespace {

// Monday 2023-01-02 00:00 UTC
constexpr std::int64_t kBase = 1672617600;

std::int64_t ts(int day, int minute) { return kBase + day * 86400 + minute * 60; }

rs::CdrEvent ev(std::uint64_t user, int day, int minute, rs::GeoPoint tower) {
  return {user, ts(day, minute), tower};
}

// towers roughly along a parallel, spaced by east_km
rs::GeoPoint tower_east(double east_km) {
  return {40.40, -3.80 + east_km / (rs::kKmPerDegree * 0.7615749)};  // cos(40.4 deg)
}

}  // namespace

TEST_CASE("calendar helpers") {
  CHECK_FALSE(rs::is_weekend(ts(0, 600)));  // Monday
  CHECK_FALSE(rs::is_weekend(ts(4, 600)));  // Friday
  CHECK(rs::is_weekend(ts(5, 600)));        // Saturday
  CHECK(rs::is_weekend(ts(6, 600)));        // Sunday
  CHECK(rs::minutes_of_day(ts(3, 754)) == 754);
  CHECK(rs::minutes_of_day(ts(0, 0)) == 0);
}

TEST_CASE("single-linkage tower clustering") {
  const auto t0 = tower_east(0.0);
  const auto t1 = tower_east(0.8);
  const auto t2 = tower_east(1.6);
  std::vector<rs::CdrEvent> events;
  for (int d = 0; d < 3; ++d) {
    events.push_back(ev(1, d, 600, t0));
    events.push_back(ev(1, d, 700, t1));
    events.push_back(ev(1, d, 800, t2));
  }

  SUBCASE("chained within the merge radius") {
    // t0-t1 and t1-t2 are 0.8 km apart; t0-t2 is 1.6 km but chains through t1
    const auto clusters = rs::cluster_events(events, 1.0);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].towers.size() == 3);
    CHECK(clusters[0].days_appeared == 3);
    CHECK(clusters[0].total_events == 9);
    CHECK(clusters[0].rank == 1);
    CHECK(clusters[0].contains_tower(t1));
  }

  SUBCASE("radius below the chain spacing") {
    const auto clusters = rs::cluster_events(events, 0.5);
    CHECK(clusters.size() == 3);
    for (const auto& c : clusters) CHECK(c.towers.size() == 1);
  }

  SUBCASE("rank follows days appeared") {
    std::vector<rs::CdrEvent> uneven;
    const auto far = tower_east(10.0);
    for (int d = 0; d < 5; ++d) uneven.push_back(ev(1, d, 600, t0));
    for (int d = 0; d < 2; ++d) uneven.push_back(ev(1, d, 700, far));
    const auto clusters = rs::cluster_events(uneven, 1.0);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].rank == 1);
    CHECK(clusters[0].days_appeared == 5);
    CHECK(clusters[1].rank == 2);
    CHECK(clusters[1].days_appeared == 2);
  }
}

TEST_CASE("hour-window counters") {
  const auto t0 = tower_east(0.0);
  std::vector<rs::CdrEvent> events = {
      ev(1, 0, 20 * 60, t0),      // 20:00 -> home window
      ev(1, 0, 2 * 60, t0),       // 02:00 -> home window (wraps past midnight)
      ev(1, 0, 6 * 60 + 59, t0),  // 06:59 -> home window
      ev(1, 0, 7 * 60, t0),       // 07:00 -> neither
      ev(1, 0, 14 * 60, t0),      // 14:00 -> work window
      ev(1, 0, 16 * 60 + 59, t0), // 16:59 -> work window
      ev(1, 0, 17 * 60, t0),      // 17:00 -> neither
  };
  const auto clusters = rs::cluster_events(events, 1.0);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].home_hour_events == 3);
  CHECK(clusters[0].work_hour_events == 2);
  CHECK(clusters[0].total_events == 7);
}

TEST_CASE("eligibility") {
  const auto home = tower_east(0.0);
  const auto work = tower_east(8.0);

  // 30 days, 2 calls/day across two persistent clusters: eligible
  std::vector<rs::CdrEvent> good;
  for (int d = 0; d < 30; ++d) {
    good.push_back(ev(1, d, 20 * 60, home));
    good.push_back(ev(1, d, 14 * 60, work));
  }
  CHECK(rs::eligible(good, 1.0));

  // below one call per day on average
  std::vector<rs::CdrEvent> sparse;
  for (int d = 0; d < 30; d += 2) {
    sparse.push_back(ev(1, d, 20 * 60, home));
  }
  sparse.push_back(ev(1, 29, 14 * 60, work));
  CHECK_FALSE(rs::eligible(sparse, 1.0));

  // plenty of calls but only one persistent cluster
  std::vector<rs::CdrEvent> single;
  for (int d = 0; d < 30; ++d) {
    single.push_back(ev(1, d, 20 * 60, home));
    single.push_back(ev(1, d, 21 * 60, home));
  }
  single.push_back(ev(1, 29, 14 * 60, work));  // work seen 1 day only
  CHECK_FALSE(rs::eligible(single, 1.0));

  // second cluster persistent in days but spanning < 2 weeks
  std::vector<rs::CdrEvent> brief;
  for (int d = 0; d < 30; ++d) brief.push_back(ev(1, d, 20 * 60, home));
  for (int d = 10; d < 16; ++d) brief.push_back(ev(1, d, 14 * 60, work));
  CHECK_FALSE(rs::eligible(brief, 1.0));
}

TEST_CASE("home/work classification") {
  const auto home = tower_east(0.0);
  const auto work = tower_east(8.0);
  const auto noise = tower_east(16.0);

  std::vector<rs::CdrEvent> events;
  for (int d = 0; d < 28; ++d) {
    events.push_back(ev(1, d, 21 * 60, home));
    events.push_back(ev(1, d, 22 * 60, home));
    if (d % 7 < 5) events.push_back(ev(1, d, 14 * 60, work));
  }
  events.push_back(ev(1, 3, 12 * 60, noise));

  const auto clusters = rs::cluster_events(events, 1.0);
  REQUIRE(clusters.size() == 3);
  const auto result = rs::classify_home_work(clusters, rs::default_weights());
  REQUIRE(result.has_value());
  CHECK(clusters[result->home_cluster].contains_tower(home));
  CHECK(clusters[result->work_cluster].contains_tower(work));
  CHECK(result->home_cluster != result->work_cluster);
  CHECK(rs::distance_km(result->home, home) < 0.01);
  CHECK(rs::distance_km(result->work, work) < 0.01);
}

TEST_CASE("classification rejects ties and tiny inputs") {
  const auto a = tower_east(0.0);
  const auto b = tower_east(8.0);

  // two perfectly symmetric clusters score identically: ambiguous
  std::vector<rs::CdrEvent> events;
  for (int d = 0; d < 20; ++d) {
    events.push_back(ev(1, d, 21 * 60, a));
    events.push_back(ev(1, d, 21 * 60, b));
  }
  const auto clusters = rs::cluster_events(events, 1.0);
  REQUIRE(clusters.size() == 2);
  CHECK_FALSE(rs::classify_home_work(clusters, rs::default_weights()).has_value());

  // a single cluster can never yield a (home, work) pair
  std::vector<rs::CdrEvent> one;
  for (int d = 0; d < 20; ++d) one.push_back(ev(1, d, 21 * 60, a));
  CHECK_FALSE(
      rs::classify_home_work(rs::cluster_events(one, 1.0), rs::default_weights()).has_value());
}

TEST_CASE("weight training") {
  // synthetic labeled users with clearly separated home/work signatures
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> jitter(0, 3);
  std::vector<rs::LabeledUser> labeled;
  for (int u = 0; u < 30; ++u) {
    const auto home = tower_east(0.0 + u * 0.01);
    const auto work = tower_east(8.0 + u * 0.01);
    std::vector<rs::CdrEvent> events;
    for (int d = 0; d < 28; ++d) {
      events.push_back(ev(u + 1, d, 20 * 60 + jitter(rng), home));
      if (d % 7 < 5) events.push_back(ev(u + 1, d, 14 * 60 + jitter(rng), work));
    }
    rs::LabeledUser lu;
    lu.clusters = rs::cluster_events(events, 1.0);
    lu.true_home = home;
    lu.true_work = work;
    labeled.push_back(std::move(lu));
  }

  const auto w = rs::train_weights(labeled);
  // trained weights classify the training set correctly
  int correct = 0;
  for (const auto& lu : labeled) {
    const auto r = rs::classify_home_work(lu.clusters, w);
    if (r && rs::distance_km(r->home, lu.true_home) < 0.5 &&
        rs::distance_km(r->work, lu.true_work) < 0.5)
      ++correct;
  }
  CHECK(correct >= 27);

  // deterministic
  const auto w2 = rs::train_weights(labeled);
  for (int i = 0; i < 5; ++i) {
    CHECK(w.home[i] == doctest::Approx(w2.home[i]).epsilon(1e-9));
    CHECK(w.work[i] == doctest::Approx(w2.work[i]).epsilon(1e-9));
  }

  // too few users
  std::vector<rs::LabeledUser> few(labeled.begin(), labeled.begin() + 10);
  CHECK_THROWS(rs::train_weights(few));
}

TEST_CASE("departure estimation") {
  const auto home = tower_east(0.0);
  const auto work = tower_east(8.0);
  std::vector<rs::CdrEvent> events;
  // three mornings: home call then a work call 15 min later (trip time 20,
  // so the 2x window is 40 min)
  const int mornings[3] = {505, 510, 521};
  const int evenings[3] = {990, 1000, 1004};
  for (int d = 0; d < 3; ++d) {
    events.push_back(ev(1, d, mornings[d], home));
    events.push_back(ev(1, d, mornings[d] + 15, work));
    events.push_back(ev(1, d, evenings[d], work));
    events.push_back(ev(1, d, evenings[d] + 15, home));
  }
  const auto clusters = rs::cluster_events(events, 1.0);
  REQUIRE(clusters.size() == 2);
  const auto& hc = clusters[0].contains_tower(home) ? clusters[0] : clusters[1];
  const auto& wc = clusters[0].contains_tower(work) ? clusters[0] : clusters[1];

  SUBCASE("median of valid pairs") {
    const auto [lh, lw] = rs::estimate_departure(events, hc, wc, 20.0);
    REQUIRE(lh.has_value());
    REQUIRE(lw.has_value());
    CHECK(*lh == doctest::Approx(510.0));
    CHECK(*lw == doctest::Approx(1000.0));
  }

  SUBCASE("pairs slower than twice the trip time are rejected") {
    // push the work-side replies 2 hours out: no usable morning pairs remain
    std::vector<rs::CdrEvent> late;
    for (int d = 0; d < 3; ++d) {
      late.push_back(ev(1, d, mornings[d], home));
      late.push_back(ev(1, d, mornings[d] + 120, work));
    }
    const auto [lh, lw] = rs::estimate_departure(late, hc, wc, 20.0);
    CHECK_FALSE(lh.has_value());
    CHECK_FALSE(lw.has_value());
  }

  SUBCASE("fewer than three samples yields none") {
    std::vector<rs::CdrEvent> two(events.begin(), events.begin() + 8);  // 2 days
    const auto [lh, lw] = rs::estimate_departure(two, hc, wc, 20.0);
    CHECK_FALSE(lh.has_value());
    CHECK_FALSE(lw.has_value());
  }

  SUBCASE("calls outside the departure windows are ignored") {
    std::vector<rs::CdrEvent> noisy = events;
    for (int d = 0; d < 3; ++d) {
      noisy.push_back(ev(1, d, 300, home));       // 05:00, before the window
      noisy.push_back(ev(1, d, 310, work));
    }
    std::sort(noisy.begin(), noisy.end(),
              [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    const auto [lh, lw] = rs::estimate_departure(noisy, hc, wc, 20.0);
    REQUIRE(lh.has_value());
    CHECK(*lh == doctest::Approx(510.0));
  }
}

TEST_CASE("CDR CSV round trip") {
  const std::vector<rs::CdrEvent> events = {
      ev(1, 0, 600, tower_east(0.0)),
      ev(1, 1, 700, tower_east(1.5)),
      ev(2, 0, 650, tower_east(3.0)),
  };
  const std::string path = "/tmp/rs_test_cdr.csv";
  rs::save_cdr(events, path);
  const auto loaded = rs::load_cdr(path);
  REQUIRE(loaded.size() == events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    CHECK(loaded[i].user_id == events[i].user_id);
    CHECK(loaded[i].timestamp == events[i].timestamp);
    CHECK(loaded[i].tower.lat == doctest::Approx(events[i].tower.lat).epsilon(1e-7));
  }
  std::remove(path.c_str());
}

TEST_CASE("synthetic traces") {
  rs::CityConfig cfg = rs::city_preset("clustered-metro", 150, 21);
  const auto commuters = rs::generate_city(cfg);
  rs::SynthCdrConfig synth_cfg;
  synth_cfg.days = 40;
  synth_cfg.seed = 4;
  const auto synth = rs::synthesize_cdr(commuters, cfg.box, synth_cfg);

  CHECK(!synth.truth.empty());
  CHECK(synth.truth.size() <= commuters.size());
  CHECK(std::is_sorted(synth.events.begin(), synth.events.end(),
                       [](const auto& a, const auto& b) {
                         return std::tie(a.user_id, a.timestamp) <
                                std::tie(b.user_id, b.timestamp);
                       }));

  // deterministic in the seed
  const auto synth2 = rs::synthesize_cdr(commuters, cfg.box, synth_cfg);
  CHECK(synth2.events.size() == synth.events.size());
  CHECK(synth2.truth.size() == synth.truth.size());
}
