#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>

namespace anderson {

template <typename Real>
struct GaussLegendreRule {
  Eigen::Matrix<Real, Eigen::Dynamic, 1> nodes;    // on [-1, 1]
  Eigen::Matrix<Real, Eigen::Dynamic, 1> weights;  // sum to 2
};

// n-point Gauss-Legendre rule by Newton iteration on P_n from the
// Chebyshev-like initial guesses.
template <typename Real = double>
GaussLegendreRule<Real> gauss_legendre(int n) {
  GaussLegendreRule<Real> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Real x = std::cos(std::numbers::pi_v<Real> * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1, p1 = 0;
      for (int j = 1; j <= n; ++j) {
        const Real p2 = p1;
        p1 = p0;
        p0 = ((Real(2 * j - 1)) * x * p1 - Real(j - 1) * p2) / Real(j);
      }
      dp = Real(n) * (x * p0 - p1) / (x * x - Real(1));
      const Real dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) <= Real(4) * std::numeric_limits<Real>::epsilon()) break;
    }
    const Real w = Real(2) / ((Real(1) - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

struct QuadratureOptions {
  int order = 20;                 // Gauss-Legendre points per panel
  double abs_tol = 1e-11;         // accepted change between refinements
  double rel_tol = 1e-14;         // ... relative to the integral of |f|
  int max_nodes_per_piece = 1 << 14;
};

}  // namespace anderson
