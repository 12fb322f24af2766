#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rs/endpoints.hpp"

namespace rs {

// Saturating savings model s(n) = a - b * n^(-c).
struct SavingsCurve {
  double a = 0.0;  // asymptote, [0, 75]
  double b = 0.0;  // >= 0
  double c = 0.5;  // (0, 5]
  double rms_residual = 0.0;
  int iterations = 0;

  double evaluate(double n) const;
};

struct FitError : std::runtime_error {
  explicit FitError(std::vector<double> residuals);
  std::vector<double> residuals;
};

struct FitOptions {
  double a_max = kAbsoluteBoundPercent;
  double c_max = 5.0;
  double tolerance = 1e-10;
  int max_iterations = 500;
};

// Levenberg-damped Gauss-Newton over (sample_fraction, savings_percent)
// points; needs >= 3 distinct fractions.
SavingsCurve fit_savings_curve(std::span<const std::pair<double, double>> points,
                               const FitOptions& opts = {});

// s(target_multiple) clamped to [max observed savings, 75].
double project_savings(const SavingsCurve& curve, double target_multiple,
                       double max_observed_savings);

double fit_and_project(std::span<const std::pair<double, double>> points,
                       double target_multiple, const FitOptions& opts = {});

// Runs `solver` on `repeats` uniform subsamples per fraction and averages the
// resulting savings. The solver maps a subpopulation to a savings percent.
using SolverFn = std::function<double(const std::vector<Commuter>&)>;
std::vector<std::pair<double, double>> sample_curve(const std::vector<Commuter>& all,
                                                    std::span<const double> fractions,
                                                    const SolverFn& solver,
                                                    std::size_t repeats,
                                                    std::uint64_t seed);

}  // namespace rs
