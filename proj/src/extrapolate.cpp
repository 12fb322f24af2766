#include "rs/extrapolate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace rs {

double SavingsCurve::evaluate(double n) const { return a - b * std::pow(n, -c); }

FitError::FitError(std::vector<double> res)
    : std::runtime_error("fit_savings_curve: no convergence; " +
                         std::to_string(res.size()) + " residuals retained"),
      residuals(std::move(res)) {}

namespace {

constexpr double kBMin = 0.0;
constexpr double kCMin = 1e-6;

double cost_of(const std::vector<std::pair<double, double>>& pts, const SavingsCurve& s) {
  double sum = 0.0;
  for (const auto& [n, y] : pts) {
    const double r = s.evaluate(n) - y;
    sum += r * r;
  }
  return sum;
}

// 3x3 solve by Gaussian elimination with partial pivoting
bool solve3(double m[3][3], double rhs[3], double out[3]) {
  int piv[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int best = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[piv[r]][col]) > std::abs(m[piv[best]][col])) best = r;
    std::swap(piv[col], piv[best]);
    if (std::abs(m[piv[col]][col]) < 1e-300) return false;
    for (int r = col + 1; r < 3; ++r) {
      const double f = m[piv[r]][col] / m[piv[col]][col];
      for (int k = col; k < 3; ++k) m[piv[r]][k] -= f * m[piv[col]][k];
      rhs[piv[r]] -= f * rhs[piv[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double v = rhs[piv[col]];
    for (int k = col + 1; k < 3; ++k) v -= m[piv[col]][k] * out[k];
    out[col] = v / m[piv[col]][col];
  }
  return true;
}

}  // namespace

SavingsCurve fit_savings_curve(std::span<const std::pair<double, double>> points,
                               const FitOptions& opts) {
  std::set<double> fractions;
  for (const auto& [n, y] : points) {
    if (n <= 0.0) throw std::invalid_argument("fit_savings_curve: fractions must be > 0");
    fractions.insert(n);
  }
  if (fractions.size() < 3)
    throw std::invalid_argument("fit_savings_curve: need >= 3 points with distinct fractions");

  std::vector<std::pair<double, double>> pts(points.begin(), points.end());
  double y_min = pts.front().second, y_max = pts.front().second;
  for (const auto& [n, y] : pts) {
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }

  SavingsCurve s;
  s.a = std::min(y_max + 5.0, opts.a_max);
  s.b = std::max(s.a - y_min, 1e-6);
  s.c = 0.5;

  auto clamp_params = [&](SavingsCurve& q) {
    q.a = std::clamp(q.a, 0.0, opts.a_max);
    q.b = std::max(q.b, kBMin);
    q.c = std::clamp(q.c, kCMin, opts.c_max);
  };

  double lambda = 1e-3;
  double cost = cost_of(pts, s);
  bool converged = false;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    // J^T J and J^T r for r_i = s(n_i) - y_i
    double jtj[3][3] = {};
    double jtr[3] = {};
    for (const auto& [n, y] : pts) {
      const double npc = std::pow(n, -s.c);
      const double j[3] = {1.0, -npc, s.b * npc * std::log(n)};
      const double r = s.evaluate(n) - y;
      for (int p = 0; p < 3; ++p) {
        jtr[p] += j[p] * r;
        for (int q = 0; q < 3; ++q) jtj[p][q] += j[p] * j[q];
      }
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      double m[3][3];
      double rhs[3] = {-jtr[0], -jtr[1], -jtr[2]};
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
          m[p][q] = jtj[p][q] + (p == q ? lambda * (1.0 + jtj[p][q]) : 0.0);
      double step[3];
      if (solve3(m, rhs, step)) {
        SavingsCurve trial = s;
        trial.a += step[0];
        trial.b += step[1];
        trial.c += step[2];
        clamp_params(trial);
        const double trial_cost = cost_of(pts, trial);
        if (trial_cost <= cost) {
          const double improvement = cost - trial_cost;
          s.a = trial.a;
          s.b = trial.b;
          s.c = trial.c;
          cost = trial_cost;
          lambda = std::max(lambda / 3.0, 1e-12);
          stepped = true;
          if (improvement < opts.tolerance * std::max(1.0, cost)) converged = true;
          break;
        }
      }
      lambda *= 4.0;
    }
    if (converged) break;
    if (!stepped) {
      // stalled: accept if the model already explains the data
      if (cost < 1e-9 * std::max<std::size_t>(1, pts.size())) {
        converged = true;
        break;
      }
      std::vector<double> residuals;
      for (const auto& [n, y] : pts) residuals.push_back(s.evaluate(n) - y);
      throw FitError(std::move(residuals));
    }
  }
  if (!converged) {
    std::vector<double> residuals;
    for (const auto& [n, y] : pts) residuals.push_back(s.evaluate(n) - y);
    throw FitError(std::move(residuals));
  }
  s.rms_residual = std::sqrt(cost / static_cast<double>(pts.size()));
  s.iterations = iter + 1;
  return s;
}

double project_savings(const SavingsCurve& curve, double target_multiple,
                       double max_observed_savings) {
  if (target_multiple <= 0.0)
    throw std::invalid_argument("project_savings: target must be > 0");
  const double raw = curve.evaluate(target_multiple);
  return std::clamp(raw, max_observed_savings, kAbsoluteBoundPercent);
}

double fit_and_project(std::span<const std::pair<double, double>> points,
                       double target_multiple, const FitOptions& opts) {
  const SavingsCurve curve = fit_savings_curve(points, opts);
  double max_obs = points.front().second;
  for (const auto& [n, y] : points) max_obs = std::max(max_obs, y);
  return project_savings(curve, target_multiple, max_obs);
}

std::vector<std::pair<double, double>> sample_curve(const std::vector<Commuter>& all,
                                                    std::span<const double> fractions,
                                                    const SolverFn& solver,
                                                    std::size_t repeats,
                                                    std::uint64_t seed) {
  if (repeats == 0) throw std::invalid_argument("sample_curve: repeats must be >= 1");
  for (std::size_t i = 1; i < fractions.size(); ++i)
    if (fractions[i] < fractions[i - 1])
      throw std::invalid_argument("sample_curve: fractions must be ascending");

  std::vector<std::pair<double, double>> out;
  std::uint64_t subseed = seed;
  for (double f : fractions) {
    if (f <= 0.0 || f > 1.0)
      throw std::invalid_argument("sample_curve: fractions must lie in (0, 1]");
    double total = 0.0;
    for (std::size_t r = 0; r < repeats; ++r)
      total += solver(subsample_owners(all, f, ++subseed));
    out.emplace_back(f, total / static_cast<double>(repeats));
  }
  return out;
}

}  // namespace rs
