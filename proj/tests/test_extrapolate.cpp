#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rs/extrapolate.hpp"

namespace {

std::vector<std::pair<double, double>> synth_points(double a, double b, double c,
                                                    std::initializer_list<double> ns) {
  std::vector<std::pair<double, double>> pts;
  for (double n : ns) pts.push_back({n, a - b * std::pow(n, -c)});
  return pts;
}

}  // namespace

TEST_CASE("exact parameter recovery") {
  const auto pts = synth_points(70.0, 30.0, 0.5, {0.1, 0.2, 0.4, 0.6, 0.8, 1.0});
  const auto curve = rs::fit_savings_curve(pts);
  CHECK(curve.a == doctest::Approx(70.0).epsilon(1e-6));
  CHECK(curve.b == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(curve.c == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(curve.rms_residual < 1e-6);

  for (double n : {0.1, 0.5, 1.0, 2.0})
    CHECK(curve.evaluate(n) == doctest::Approx(70.0 - 30.0 * std::pow(n, -0.5)).epsilon(1e-6));
}

TEST_CASE("recovery across parameter settings") {
  const double cases[][3] = {{50, 20, 0.3}, {72, 40, 1.2}, {30, 12, 0.8}};
  for (const auto& p : cases) {
    const auto pts = synth_points(p[0], p[1], p[2], {0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 1.0});
    const auto curve = rs::fit_savings_curve(pts);
    CHECK(curve.a == doctest::Approx(p[0]).epsilon(1e-5));
    CHECK(curve.b == doctest::Approx(p[1]).epsilon(1e-5));
    CHECK(curve.c == doctest::Approx(p[2]).epsilon(1e-5));
  }
}

TEST_CASE("too few distinct fractions") {
  CHECK_THROWS_AS(rs::fit_savings_curve(synth_points(70, 30, 0.5, {0.5, 1.0})),
                  std::invalid_argument);
  // three points but only two distinct fractions
  std::vector<std::pair<double, double>> dup = {{0.5, 40.0}, {0.5, 41.0}, {1.0, 50.0}};
  CHECK_THROWS_AS(rs::fit_savings_curve(dup), std::invalid_argument);
}

TEST_CASE("noisy fit stays sane") {
  auto pts = synth_points(60.0, 25.0, 0.6, {0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 1.0});
  const double noise[] = {0.4, -0.3, 0.2, -0.5, 0.3, -0.2, 0.1};
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i].second += noise[i];
  const auto curve = rs::fit_savings_curve(pts);
  CHECK(curve.a > 50.0);
  CHECK(curve.a <= 75.0);
  CHECK(curve.b >= 0.0);
  CHECK(curve.rms_residual < 1.0);
  // the fitted curve is non-decreasing in n for b, c >= 0
  double prev = curve.evaluate(0.05);
  for (double n = 0.1; n <= 4.0; n += 0.05) {
    const double cur = curve.evaluate(n);
    CHECK(cur >= prev - 1e-9);
    prev = cur;
  }
}

TEST_CASE("projection clamping") {
  SUBCASE("constant observations clamp to the observed value") {
    std::vector<std::pair<double, double>> flat = {
        {0.2, 40.0}, {0.4, 40.0}, {0.6, 40.0}, {1.0, 40.0}};
    const auto curve = rs::fit_savings_curve(flat);
    const double proj = rs::project_savings(curve, 3.6, 40.0);
    CHECK(proj == doctest::Approx(40.0));
  }
  SUBCASE("projection never exceeds the cap") {
    const auto pts = synth_points(74.0, 10.0, 0.8, {0.2, 0.4, 0.6, 0.8, 1.0});
    const double proj = rs::fit_and_project(pts, 100.0);
    CHECK(proj <= 75.0);
    CHECK(proj >= pts.back().second);
  }
  SUBCASE("projection at least the best observation") {
    const auto pts = synth_points(55.0, 20.0, 0.7, {0.2, 0.5, 1.0});
    const auto curve = rs::fit_savings_curve(pts);
    CHECK(rs::project_savings(curve, 3.6, 52.0) >= 52.0);
  }
}

TEST_CASE("curve sampling drives the solver") {
  const auto pop = rs::generate_city(rs::city_preset("clustered-metro", 600, 13));
  const rs::MatchConstraints c{1.0, 10.0};
  const rs::SolverFn solver = [&](const std::vector<rs::Commuter>& sub) {
    rs::PopulationIndex idx({sub.data(), sub.size()}, c.delta_km);
    const auto a = rs::endpoints_solve(idx, c, {16, 15, 3});
    return rs::success_ratio(sub.size(), a.car_count());
  };
  const std::vector<double> fractions = {0.3, 0.6, 1.0};
  const auto pts = rs::sample_curve(pop, fractions, solver, 2, 9);
  REQUIRE(pts.size() == 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].first == doctest::Approx(fractions[i]));
    CHECK(pts[i].second >= 0.0);
    CHECK(pts[i].second <= 75.0);
  }
  // denser populations should not lose savings (allow solver noise)
  CHECK(pts.back().second >= pts.front().second - 3.0);

  // deterministic
  const auto pts2 = rs::sample_curve(pop, fractions, solver, 2, 9);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(pts[i].second == doctest::Approx(pts2[i].second));

  CHECK_THROWS(rs::sample_curve(pop, std::vector<double>{0.5, 0.2}, solver, 2, 9));
  CHECK_THROWS(rs::sample_curve(pop, std::vector<double>{0.5, 1.5}, solver, 2, 9));
  CHECK_THROWS(rs::sample_curve(pop, fractions, solver, 0, 9));
}
