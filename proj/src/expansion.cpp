#include "anderson/expansion.hpp"

#include "anderson/error.hpp"

#include <cmath>
#include <string>

namespace anderson {

ModelParams ModelParams::make(int d, double h, DistributionSpec dist) {
  if (d < 1 || d > kMaxDimension)
    throw ConfigError("must lie in [1, " + std::to_string(kMaxDimension) + "]", "model.d");
  if (!(h >= 0.0) || !std::isfinite(h)) throw ConfigError("must be finite and >= 0", "model.h");
  return ModelParams{d, h, std::move(dist)};
}

double convergence_ratio(const ModelParams& params, const ContinuationWindow& win) {
  return 2.0 * params.d * win.C * params.h / win.gap();
}

namespace {

void check_ratio(double rho) {
  if (!(rho < 1.0))
    throw DivergenceError("walk expansion ratio rho = " + std::to_string(rho) + " >= 1; reduce h or widen the window");
}

void assert_within(const cplx& term, double bound, int order) {
  if (std::abs(term) > bound * (1.0 + 1e-9) + 1e-300)
    throw NumericalError("order " + std::to_string(order) + " term exceeds its certified envelope");
}

double signed_power(double h, int k) { return k % 2 == 0 ? std::pow(h, k) : -std::pow(h, k); }

}  // namespace

SeriesResult resolvent_element(const ModelParams& params, const ContinuationWindow& win, const LatticeSite& n,
                               const LatticeSite& m, cplx z, const ExpansionOptions& opts) {
  const double rho = convergence_ratio(params, win);
  check_ratio(rho);

  const double scale = win.C / win.gap();
  auto tail = [&](int K) { return rho == 0.0 ? 0.0 : scale * std::pow(rho, K + 1) / (1.0 - rho); };
  int K = 0;
  while (tail(K) > opts.tol && K < opts.K_max) ++K;
  opts.limits.check(params.d, K);

  const MomentTable table = moment_table(params.dist, win, z, K + 1, opts.quad);
  const ProfileWeight weight = [&](const VisitProfile& p) {
    cplx prod = 1.0;
    for (const auto& e : p.entries) prod *= table[e.count];
    return prod;
  };

  SeriesResult r;
  r.ratio = rho;
  r.tol = opts.tol;
  r.K_used = K;
  for (int k = 0; k <= K; ++k) {
    const cplx term = signed_power(params.h, k) * fold_paths(params.d, k, n, m, weight, opts.limits);
    const double bound = scale * std::pow(rho, k);
    assert_within(term, bound, k);
    r.terms.push_back(term);
    r.term_bounds.push_back(bound);
    r.value += term;
  }
  r.tail_bound = tail(K);
  return r;
}

// ---------------------------------------------------------------- LocalOperator

LocalOperator::LocalOperator(int d, std::vector<Entry> entries) : d_(d), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.offset.size() != d) throw ConfigError("stencil offset dimension does not match d");
    range_ = std::max(range_, e.offset.size() ? e.offset.cwiseAbs().maxCoeff() : 0);
    bound_ = std::max(bound_, std::abs(e.value));
  }
}

LocalOperator LocalOperator::identity(int d) { return LocalOperator(d, {{origin(d), 1.0}}); }

LocalOperator LocalOperator::zero(int d) { return LocalOperator(d, {}); }

LocalOperator LocalOperator::shift(int d, int axis, int step) {
  if (axis < 0 || axis >= d) throw ConfigError("shift axis out of range");
  LatticeSite off = origin(d);
  off[axis] = step;
  return LocalOperator(d, {{off, 1.0}});
}

LocalOperator LocalOperator::from_stencil(int d, std::vector<Entry> entries) {
  return LocalOperator(d, std::move(entries));
}

LocalOperator LocalOperator::adjoint() const {
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back({LatticeSite(-e.offset), std::conj(e.value)});
  return LocalOperator(d_, std::move(out));
}

cplx LocalOperator::operator()(const LatticeSite& x, const LatticeSite& y) const {
  cplx v = 0.0;
  for (const auto& e : entries_)
    if (y - x == e.offset) v += e.value;
  return v;
}

// ---------------------------------------------------------------- correlation

SeriesResult correlation_element(const ModelParams& params, const CorrelationWindows& win, const LocalOperator& a1,
                                 const LocalOperator& a2, cplx z1, cplx z2, const ExpansionOptions& opts,
                                 const LatticeSite* n, const LatticeSite* m) {
  if (a1.dimension() != params.d || a2.dimension() != params.d)
    throw ConfigError("operator dimension does not match the model");
  const LatticeSite start = n ? *n : origin(params.d);
  const LatticeSite end = m ? *m : origin(params.d);

  const double kappa = correlation_distance(params.dist, win, z1, z2);
  if (kappa < 0.5 * win.gap())
    throw GeometryError("z1 or z2 too close to the correlation contour");
  const double rho = 2.0 * params.d * win.C * params.h / kappa;
  check_ratio(rho);

  const int R = std::max(a1.range(), a2.range());
  const double paths = std::pow(2.0 * R + 1.0, 2.0 * params.d);
  const double pre = paths * a1.bound() * a2.bound() * std::pow(win.C / kappa, 2);
  auto tail = [&](int N) {
    if (rho == 0.0 || pre == 0.0) return 0.0;
    return pre * std::pow(rho, N + 1) * ((N + 2) / (1.0 - rho) + rho / ((1.0 - rho) * (1.0 - rho)));
  };
  int N = 0;
  while (tail(N) > opts.tol && N < opts.K_max) ++N;
  opts.limits.check(params.d, N);

  const Eigen::MatrixXcd table = mixed_moment_table(params.dist, win, z1, z2, N + 1, N + 1, opts.quad);
  const CorrelationWeight weight = [&](const VisitProfile& nu1, const VisitProfile& nu2, const Junction& j) {
    cplx prod = a1(j.first_end, j.second_start);
    if (prod == 0.0) return prod;
    prod *= a2(j.second_end, j.target);
    if (prod == 0.0) return prod;
    for (const auto& e : nu1.entries) prod *= table(e.count, nu2.count(e.site));
    for (const auto& e : nu2.entries)
      if (nu1.count(e.site) == 0) prod *= table(0, e.count);
    return prod;
  };

  SeriesResult r;
  r.ratio = rho;
  r.tol = opts.tol;
  r.K_used = N;
  for (int s = 0; s <= N; ++s) {
    cplx fold = 0.0;
    for (int k = 0; k <= s; ++k) fold += fold_correlation_paths(params.d, k, s - k, R, start, end, weight, opts.limits);
    const cplx term = signed_power(params.h, s) * fold;
    const double bound = pre * (s + 1) * std::pow(rho, s);
    assert_within(term, bound, s);
    r.terms.push_back(term);
    r.term_bounds.push_back(bound);
    r.value += term;
  }
  r.tail_bound = tail(N);
  return r;
}

double diagonal_exclusion_width(const ModelParams& params, double C) { return 8.0 * params.d * C * params.h; }

}  // namespace anderson
