#pragma once

#include "anderson/contour.hpp"
#include "anderson/distribution.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <complex>

namespace anderson {

// Stadium window O_delta = {dist(z, [a,b]) < delta} across which the moments
// B_l(z) are continued from the upper half-plane, together with the inner
// radius delta' and the constant C of the bound |B_l| <= C (delta-delta')^-l.
struct ContinuationWindow {
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
  double delta_prime = 0.0;
  double C = 1.0;

  double gap() const { return delta - delta_prime; }

  // Checks a <= b, 0 < delta' < delta and [a-delta, b+delta] inside the
  // support of dist (where its density is analytic); computes C.
  static ContinuationWindow make(const DistributionSpec& dist, double a, double b, double delta,
                                 double delta_prime);
  // delta = 0.9 * dist([a,b], support edge), delta' = delta / 2.
  static ContinuationWindow make_default(const DistributionSpec& dist, double a, double b);

  // z lies in O_{delta'}.
  bool inner_contains(cplx z) const;
};

// Two disjoint disks O_delta(E1), O_delta(E2) for the mixed moments
// B_{k,l}(z1, z2): z1 continues downward from C+ through the first disk, z2
// upward from C- through the second. delta' is always delta / 2.
struct CorrelationWindows {
  double e1 = 0.0;
  double e2 = 0.0;
  double delta = 0.0;
  double delta_prime = 0.0;
  double C = 1.0;

  double gap() const { return delta - delta_prime; }

  // Requires |E1 - E2| >= 2 delta and both disks inside the support.
  static CorrelationWindows make(const DistributionSpec& dist, double e1, double e2, double delta);
  // delta = 0.9 * min(|E1-E2|/2, distance of either centre to the support edge).
  static CorrelationWindows make_default(const DistributionSpec& dist, double e1, double e2);
};

enum class MomentMethod { closed_form, contour, direct };

const char* to_string(MomentMethod m);

// B_0(z) .. B_L(z) at one energy. B_0 is exactly 1.
struct MomentTable {
  cplx z;
  Eigen::VectorXcd values;
  MomentMethod method = MomentMethod::contour;

  int max_order() const { return static_cast<int>(values.size()) - 1; }
  const cplx& operator[](int l) const { return values[l]; }
};

// ---- contours ----

// Lower boundary of the stadium: quarter arc around a from a-delta down to
// a-i delta, the segment to b-i delta, quarter arc up to b+delta. Its length
// is (b - a) + pi delta.
Contour stadium_lower_boundary(const ContinuationWindow& win);
// The real support outside [a-delta, b+delta], as real segments.
Contour support_outside_window(const DistributionSpec& dist, const ContinuationWindow& win);
// Smallest distance from z to everything the continued integral touches.
double contour_distance(const DistributionSpec& dist, const ContinuationWindow& win, cplx z);

// The support [lo, hi] as a path along the real axis, dipping below the disk
// at E1 and bumping above the disk at E2 (semicircles of radius delta).
Contour correlation_contour(const DistributionSpec& dist, const CorrelationWindows& win);
// Just the two semicircles.
Contour correlation_arcs(const CorrelationWindows& win);

// ---- moments ----

// Closed form for the uniform law on [-a, a]; requires Im z > 0.
cplx moment_uniform_closed(double a, int l, cplx z);
MomentTable moment_table_closed(double a, cplx z, int max_order);

// Continued B_l(z) through the stadium contour. z must be at distance at
// least delta - delta' from the contour and the outside support.
cplx moment_contour(const DistributionSpec& dist, const ContinuationWindow& win, int l, cplx z,
                    const QuadratureOptions& opts = {});
// All orders 0..max_order on shared quadrature nodes. When z lies in
// O_{delta'} each entry is checked against C (delta-delta')^-l.
MomentTable moment_table(const DistributionSpec& dist, const ContinuationWindow& win, cplx z, int max_order,
                         const QuadratureOptions& opts = {});

// Primary definition: integral over the real support, Im z != 0.
MomentTable moment_table_direct(const DistributionSpec& dist, cplx z, int max_order,
                                const QuadratureOptions& opts = {});

// B_{p,q}(z1, z2) for p <= max_p, q <= max_q, entry (p, q).
Eigen::MatrixXcd mixed_moment_table(const DistributionSpec& dist, const CorrelationWindows& win, cplx z1,
                                    cplx z2, int max_p, int max_q, const QuadratureOptions& opts = {});
cplx mixed_moment(const DistributionSpec& dist, const CorrelationWindows& win, int k, int l, cplx z1, cplx z2,
                  const QuadratureOptions& opts = {});
// Smallest distance from z1 and z2 to the correlation contour.
double correlation_distance(const DistributionSpec& dist, const CorrelationWindows& win, cplx z1, cplx z2);

// ---- constants ----

// 1 + length(eta) * sup_eta |g|, the supremum taken over Gauss nodes (at
// least 64 per piece) and the piece endpoints.
template <class Density>
double bound_constant(const Contour& eta, const Density& g) {
  const auto rule = gauss_legendre<double>(16);
  double sup = 0.0;
  for (const auto& piece : eta.pieces) {
    constexpr int kPanels = 4;
    for (int p = 0; p < kPanels; ++p)
      for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
        const double t = (p + 0.5 * (rule.nodes[q] + 1.0)) / kPanels;
        sup = std::max(sup, std::abs(g(piece.point(t))));
      }
    sup = std::max({sup, std::abs(g(piece.start())), std::abs(g(piece.finish()))});
  }
  return 1.0 + eta.length() * sup;
}

double bound_constant(const DistributionSpec& dist, double a, double b, double delta);

// delta (log delta + pi) <= a and 1 <= delta <= a: sufficient for
// |B_l(z)| <= delta^-l for the uniform law on [-a, a] with unit hopping.
bool uniform_bound_check(double a, double delta);
// Largest delta accepted by uniform_bound_check (bisection); NaN when none is.
double best_uniform_delta(double a);

}  // namespace anderson
