#include "anderson/moment_engine.hpp"

#include "anderson/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace anderson {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEdgeSlack = 1e-12;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void require_inside_support(const DistributionSpec& dist, double lo, double hi, const std::string& what) {
  if (lo < dist.support_lo() - kEdgeSlack || hi > dist.support_hi() + kEdgeSlack)
    throw GeometryError(what + " [" + fmt_double(lo) + ", " + fmt_double(hi) +
                        "] leaves the support [" + fmt_double(dist.support_lo()) + ", " +
                        fmt_double(dist.support_hi()) + "] where the density is analytic");
}

auto density_of(const DistributionSpec& dist) {
  return [&dist](cplx w) { return dist.analytic_density(w); };
}

}  // namespace

const char* to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::closed_form: return "closed-form";
    case MomentMethod::contour: return "contour";
    case MomentMethod::direct: return "direct";
  }
  return "?";
}

// ---------------------------------------------------------------- windows

ContinuationWindow ContinuationWindow::make(const DistributionSpec& dist, double a, double b, double delta,
                                            double delta_prime) {
  if (!(a <= b)) throw ConfigError("interval must satisfy a <= b", "window.I");
  if (!(delta > 0.0)) throw ConfigError("must be positive", "window.delta");
  if (!(delta_prime > 0.0 && delta_prime < delta))
    throw ConfigError("must satisfy 0 < delta_prime < delta", "window.delta_prime");
  require_inside_support(dist, a - delta, b + delta, "window closure");
  ContinuationWindow win{a, b, delta, delta_prime, 1.0};
  win.C = bound_constant(dist, a, b, delta);
  return win;
}

ContinuationWindow ContinuationWindow::make_default(const DistributionSpec& dist, double a, double b) {
  const double edge = std::min(a - dist.support_lo(), dist.support_hi() - b);
  if (!(edge > 0.0)) throw GeometryError("interval I must lie strictly inside the support");
  const double delta = 0.9 * edge;
  return make(dist, a, b, delta, 0.5 * delta);
}

bool ContinuationWindow::inner_contains(cplx z) const {
  const double x = std::clamp(z.real(), a, b);
  return std::abs(z - cplx(x, 0.0)) < delta_prime;
}

CorrelationWindows CorrelationWindows::make(const DistributionSpec& dist, double e1, double e2, double delta) {
  if (!(delta > 0.0)) throw ConfigError("must be positive", "correlation.delta");
  if (std::abs(e1 - e2) < 2.0 * delta * (1.0 - 1e-12))
    throw GeometryError("correlation disks overlap: need |E1 - E2| >= 2 delta");
  require_inside_support(dist, e1 - delta, e1 + delta, "disk around E1");
  require_inside_support(dist, e2 - delta, e2 + delta, "disk around E2");
  CorrelationWindows win{e1, e2, delta, 0.5 * delta, 1.0};
  win.C = bound_constant(correlation_arcs(win), density_of(dist));
  return win;
}

CorrelationWindows CorrelationWindows::make_default(const DistributionSpec& dist, double e1, double e2) {
  const double lo = dist.support_lo();
  const double hi = dist.support_hi();
  const double room = std::min({0.5 * std::abs(e1 - e2), e1 - lo, hi - e1, e2 - lo, hi - e2});
  if (!(room > 0.0)) throw GeometryError("E1, E2 must be distinct and inside the support");
  return make(dist, e1, e2, 0.9 * room);
}

// ---------------------------------------------------------------- contours

Contour stadium_lower_boundary(const ContinuationWindow& win) {
  Contour c;
  const double r = win.delta;
  c.pieces.push_back(ContourPiece::arc(cplx(win.a, 0.0), r, kPi, 1.5 * kPi));
  c.pieces.push_back(ContourPiece::segment(cplx(win.a, -r), cplx(win.b, -r)));
  c.pieces.push_back(ContourPiece::arc(cplx(win.b, 0.0), r, -0.5 * kPi, 0.0));
  return c;
}

Contour support_outside_window(const DistributionSpec& dist, const ContinuationWindow& win) {
  Contour c;
  const double left = win.a - win.delta;
  const double right = win.b + win.delta;
  if (dist.support_lo() < left)
    c.pieces.push_back(ContourPiece::segment(cplx(dist.support_lo(), 0.0), cplx(left, 0.0)));
  if (right < dist.support_hi())
    c.pieces.push_back(ContourPiece::segment(cplx(right, 0.0), cplx(dist.support_hi(), 0.0)));
  return c;
}

double contour_distance(const DistributionSpec& dist, const ContinuationWindow& win, cplx z) {
  return std::min(stadium_lower_boundary(win).distance_to(z), support_outside_window(dist, win).distance_to(z));
}

Contour correlation_arcs(const CorrelationWindows& win) {
  Contour c;
  const double r = win.delta;
  const auto dip = ContourPiece::arc(cplx(win.e1, 0.0), r, kPi, 2.0 * kPi);
  const auto bump = ContourPiece::arc(cplx(win.e2, 0.0), r, kPi, 0.0);
  if (win.e1 < win.e2) {
    c.pieces = {dip, bump};
  } else {
    c.pieces = {bump, dip};
  }
  return c;
}

Contour correlation_contour(const DistributionSpec& dist, const CorrelationWindows& win) {
  const Contour arcs = correlation_arcs(win);
  Contour c;
  double cursor = dist.support_lo();
  for (const auto& arc : arcs.pieces) {
    const double left = arc.start().real();
    if (left > cursor) c.pieces.push_back(ContourPiece::segment(cplx(cursor, 0.0), cplx(left, 0.0)));
    c.pieces.push_back(arc);
    cursor = arc.finish().real();
  }
  if (cursor < dist.support_hi())
    c.pieces.push_back(ContourPiece::segment(cplx(cursor, 0.0), cplx(dist.support_hi(), 0.0)));
  return c;
}

double correlation_distance(const DistributionSpec& dist, const CorrelationWindows& win, cplx z1, cplx z2) {
  const Contour c = correlation_contour(dist, win);
  return std::min(c.distance_to(z1), c.distance_to(z2));
}

// ---------------------------------------------------------------- moments

cplx moment_uniform_closed(double a, int l, cplx z) {
  if (!(z.imag() > 0.0)) throw DomainError("closed-form moments need Im z > 0; use the contour route");
  if (l < 0) throw ConfigError("moment order must be nonnegative");
  if (l == 0) return 1.0;
  if (l == 1) return (std::log(a - z) - std::log(-a - z)) / (2.0 * a);
  // antiderivative of (x - z)^-l is -(x - z)^{1-l} / (l - 1)
  const int m = l - 1;
  return (std::pow(-a - z, -m) - std::pow(a - z, -m)) / (2.0 * a * m);
}

MomentTable moment_table_closed(double a, cplx z, int max_order) {
  MomentTable t{z, Eigen::VectorXcd(max_order + 1), MomentMethod::closed_form};
  for (int l = 0; l <= max_order; ++l) t.values[l] = moment_uniform_closed(a, l, z);
  return t;
}

MomentTable moment_table(const DistributionSpec& dist, const ContinuationWindow& win, cplx z, int max_order,
                         const QuadratureOptions& opts) {
  if (max_order < 0) throw ConfigError("moment order must be nonnegative");
  const double dist_z = contour_distance(dist, win, z);
  if (dist_z < win.gap() * (1.0 - 1e-12))
    throw GeometryError("z is within " + fmt_double(dist_z) + " of the continuation contour; need >= " +
                        fmt_double(win.gap()));

  Contour path = support_outside_window(dist, win);
  for (const auto& p : stadium_lower_boundary(win).pieces) path.pieces.push_back(p);

  const auto n = static_cast<Eigen::Index>(max_order) + 1;
  MomentTable t{z,
                integrate_contour(path, n,
                                  [&](cplx w, Eigen::VectorXcd& out) {
                                    const cplx u = 1.0 / (w - z);
                                    out[0] = dist.analytic_density(w);
                                    for (Eigen::Index l = 1; l < n; ++l) out[l] = out[l - 1] * u;
                                  },
                                  opts),
                MomentMethod::contour};
  t.values[0] = 1.0;

  if (win.inner_contains(z)) {
    double envelope = win.C;
    for (int l = 0; l <= max_order; ++l) {
      if (std::abs(t.values[l]) > envelope * (1.0 + 1e-9))
        throw NumericalError("moment B_" + std::to_string(l) + " violates its contour bound");
      envelope /= win.gap();
    }
  }
  return t;
}

cplx moment_contour(const DistributionSpec& dist, const ContinuationWindow& win, int l, cplx z,
                    const QuadratureOptions& opts) {
  return moment_table(dist, win, z, l, opts).values[l];
}

MomentTable moment_table_direct(const DistributionSpec& dist, cplx z, int max_order, const QuadratureOptions& opts) {
  if (z.imag() == 0.0) throw DomainError("the real-line moment integral needs Im z != 0");
  Contour line;
  line.pieces.push_back(ContourPiece::segment(cplx(dist.support_lo(), 0.0), cplx(dist.support_hi(), 0.0)));
  const auto n = static_cast<Eigen::Index>(max_order) + 1;
  MomentTable t{z,
                integrate_contour(line, n,
                                  [&](cplx w, Eigen::VectorXcd& out) {
                                    const cplx u = 1.0 / (w - z);
                                    out[0] = dist.analytic_density(w);
                                    for (Eigen::Index l = 1; l < n; ++l) out[l] = out[l - 1] * u;
                                  },
                                  opts),
                MomentMethod::direct};
  t.values[0] = 1.0;
  return t;
}

Eigen::MatrixXcd mixed_moment_table(const DistributionSpec& dist, const CorrelationWindows& win, cplx z1, cplx z2,
                                    int max_p, int max_q, const QuadratureOptions& opts) {
  if (max_p < 0 || max_q < 0) throw ConfigError("moment orders must be nonnegative");
  const double dz = correlation_distance(dist, win, z1, z2);
  if (dz < 0.5 * win.gap())
    throw GeometryError("z1 or z2 is within " + fmt_double(dz) + " of the correlation contour; need >= " +
                        fmt_double(0.5 * win.gap()));

  const Eigen::Index rows = max_p + 1;
  const Eigen::Index cols = max_q + 1;
  Eigen::VectorXcd upow(rows), vpow(cols);
  const Eigen::VectorXcd flat = integrate_contour(
      correlation_contour(dist, win), rows * cols,
      [&](cplx w, Eigen::VectorXcd& out) {
        const cplx u = 1.0 / (w - z1);
        const cplx v = 1.0 / (w - z2);
        upow[0] = dist.analytic_density(w);
        for (Eigen::Index p = 1; p < rows; ++p) upow[p] = upow[p - 1] * u;
        vpow[0] = 1.0;
        for (Eigen::Index q = 1; q < cols; ++q) vpow[q] = vpow[q - 1] * v;
        Eigen::Map<Eigen::MatrixXcd>(out.data(), rows, cols).noalias() = upow * vpow.transpose();
      },
      opts);
  Eigen::MatrixXcd table = Eigen::Map<const Eigen::MatrixXcd>(flat.data(), rows, cols);
  table(0, 0) = 1.0;
  return table;
}

cplx mixed_moment(const DistributionSpec& dist, const CorrelationWindows& win, int k, int l, cplx z1, cplx z2,
                  const QuadratureOptions& opts) {
  return mixed_moment_table(dist, win, z1, z2, k, l, opts)(k, l);
}

// ---------------------------------------------------------------- constants

double bound_constant(const DistributionSpec& dist, double a, double b, double delta) {
  const ContinuationWindow win{a, b, delta, 0.5 * delta, 1.0};
  return bound_constant(stadium_lower_boundary(win), density_of(dist));
}

bool uniform_bound_check(double a, double delta) {
  return delta >= 1.0 && delta <= a && delta * (std::log(delta) + kPi) <= a;
}

double best_uniform_delta(double a) {
  if (!uniform_bound_check(a, 1.0)) return std::numeric_limits<double>::quiet_NaN();
  if (uniform_bound_check(a, a)) return a;
  double lo = 1.0;
  double hi = a;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (uniform_bound_check(a, mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace anderson
