#pragma once

#include "anderson/distribution.hpp"
#include "anderson/lattice_walks.hpp"
#include "anderson/moment_engine.hpp"

#include <complex>
#include <vector>

namespace anderson {

// H = h * (lattice adjacency on Z^d) + V, V i.i.d. with law dist.
struct ModelParams {
  int d = 1;
  double h = 0.0;
  DistributionSpec dist = DistributionSpec::uniform(1.0);

  // d in [1, kMaxDimension], h >= 0 and finite.
  static ModelParams make(int d, double h, DistributionSpec dist);
};

// A truncated walk expansion together with its certificate: every neglected
// order is bounded by a geometric envelope with ratio `ratio`, whose sum is
// tail_bound.
struct SeriesResult {
  cplx value{};
  double tail_bound = 0.0;
  int K_used = 0;
  double ratio = 0.0;
  double tol = 0.0;
  std::vector<cplx> terms;          // contribution of each order 0..K_used
  std::vector<double> term_bounds;  // envelope for each order

  bool converged() const { return tail_bound <= tol; }
};

struct ExpansionOptions {
  double tol = 1e-8;
  int K_max = 24;
  WalkLimits limits{};
  QuadratureOptions quad{};
};

// rho = 2 d C h / (delta - delta').
double convergence_ratio(const ModelParams& params, const ContinuationWindow& win);

// Disorder average E[(H - z)^-1(n, m)] for z in O_{delta'} or anywhere in C+
// at distance >= delta - delta' from the continuation contour. Stops at the
// first K whose tail envelope C rho^{K+1} / ((delta-delta')(1-rho)) is <= tol,
// or at K_max with converged() == false.
SeriesResult resolvent_element(const ModelParams& params, const ContinuationWindow& win, const LatticeSite& n,
                               const LatticeSite& m, cplx z, const ExpansionOptions& opts = {});

// Translation-invariant banded operator: A(x, y) = stencil value at y - x.
class LocalOperator {
 public:
  struct Entry {
    LatticeSite offset;
    cplx value;
  };

  static LocalOperator identity(int d);
  static LocalOperator zero(int d);
  // A(x, x + step e_axis) = 1.
  static LocalOperator shift(int d, int axis, int step = 1);
  static LocalOperator from_stencil(int d, std::vector<Entry> entries);

  LocalOperator adjoint() const;

  cplx operator()(const LatticeSite& x, const LatticeSite& y) const;
  int dimension() const { return d_; }
  // R: sup-norm band radius.
  int range() const { return range_; }
  // M: max |A(x, y)|.
  double bound() const { return bound_; }
  const std::vector<Entry>& stencil() const { return entries_; }

 private:
  LocalOperator(int d, std::vector<Entry> entries);
  int d_ = 1;
  int range_ = 0;
  double bound_ = 0.0;
  std::vector<Entry> entries_;
};

// F(z1, z2) = E[((H - z1)^-1 A1 (H - z2)^-1 A2)(n, m)], truncated at total
// order k + l <= N. The tail envelope uses the smallest distance kappa from
// z1, z2 to the correlation contour:
//   term_s <= (2R+1)^{2d} M1 M2 (C/kappa)^2 (s+1) rho^s,  rho = 2dCh/kappa.
SeriesResult correlation_element(const ModelParams& params, const CorrelationWindows& win, const LocalOperator& a1,
                                 const LocalOperator& a2, cplx z1, cplx z2, const ExpansionOptions& opts = {},
                                 const LatticeSite* n = nullptr, const LatticeSite* m = nullptr);

// 8 d C h: real energies further apart than this have an analytic correlation.
double diagonal_exclusion_width(const ModelParams& params, double C);
inline double diagonal_exclusion_width(const ModelParams& params, const ContinuationWindow& win) {
  return diagonal_exclusion_width(params, win.C);
}

}  // namespace anderson
