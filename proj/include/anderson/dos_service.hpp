#pragma once

#include "anderson/expansion.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace anderson {

struct DosPoint {
  double value = 0.0;       // n(lambda)
  double tail_bound = 0.0;  // series tail / pi
  int K_used = 0;
};

// Density of states from the continued averaged resolvent evaluated on the
// real axis: n(lambda) = Im E[(H - lambda)^-1(0,0)] / pi. lambda must lie in
// the closed interval [a, b] of the window.
DosPoint dos_at(const ModelParams& params, const ContinuationWindow& win, double lambda,
                const ExpansionOptions& opts = {});

struct GridSpec {
  std::vector<double> points;

  // start, start + step, ..., stop (inclusive within step/2).
  static GridSpec uniform(double start, double stop, double step);
  // Throws ConfigError unless strictly increasing.
  void validate() const;
};

struct DosCurve {
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> tails;
  std::vector<int> K_used;
  double ratio = 0.0;
  double tol = 0.0;
};

// Evaluates every grid point (concurrently when workers() > 1); the curve is
// assembled in grid order and nothing is returned on error.
DosCurve dos_sweep(const ModelParams& params, const ContinuationWindow& win, const GridSpec& grid,
                   const ExpansionOptions& opts = {});

// max over grid pairs (x, -x) of |n(x) - n(-x)| - tail(x) - tail(-x); negative
// when the curve is symmetric within its certificates. nullopt when the grid
// has no mirrored pairs.
std::optional<double> symmetry_excess(const DosCurve& curve);

struct RegimeReport {
  std::optional<double> ratio;        // rho, when a window was supplied
  std::optional<double> h_threshold;  // (delta - delta') / (2 d C)
  std::optional<double> exclusion_width;
  struct UniformRegime {
    double threshold = 0.0;  // 2d (log 2d + pi), in units of h
    bool eligible = false;   // a / h > threshold
    std::pair<double, double> interval{0.0, 0.0};  // (-a + 2dh, a - 2dh)
    double best_delta = 0.0;                       // NaN when none, units of h
    double sharp_ratio = 0.0;                      // 2d / best_delta
  };
  std::optional<UniformRegime> uniform;  // only for the uniform law
};

// 2d (log(2d) + pi).
double uniform_regime_threshold(int d);

RegimeReport regime_report(const ModelParams& params, const ContinuationWindow* win);

}  // namespace anderson
