#include "anderson/distribution.hpp"

#include "anderson/error.hpp"

#include <cmath>
#include <string>

namespace anderson {

namespace {

double poly_antiderivative(const Eigen::VectorXd& c, double x) {
  double acc = 0.0;
  for (Eigen::Index j = c.size(); j-- > 0;) acc = acc * x + c[j] / static_cast<double>(j + 1);
  return acc * x;
}

}  // namespace

DistributionSpec DistributionSpec::uniform(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("uniform half-width must be positive", "a");
  return DistributionSpec(Uniform{a});
}

DistributionSpec DistributionSpec::polynomial(double lo, double hi, Eigen::VectorXd coeffs) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("polynomial support must be a finite interval lo < hi", "support");
  if (coeffs.size() == 0) throw ConfigError("polynomial needs at least one coefficient", "coefficients");

  const double mass = poly_antiderivative(coeffs, hi) - poly_antiderivative(coeffs, lo);
  if (std::abs(mass - 1.0) > 1e-12)
    throw ConfigError("density integrates to " + std::to_string(mass) + ", not 1", "coefficients");

  DistributionSpec spec(PolynomialDensity{lo, hi, std::move(coeffs)});
  constexpr int kProbe = 2048;
  for (int i = 0; i <= kProbe; ++i) {
    const double x = lo + (hi - lo) * i / kProbe;
    if (spec.analytic_density(x) < -1e-12)
      throw ConfigError("density is negative at x=" + std::to_string(x), "coefficients");
  }
  return spec;
}

bool DistributionSpec::is_even() const {
  if (is_uniform()) return true;
  const auto& p = std::get<PolynomialDensity>(law_);
  if (p.lo != -p.hi) return false;
  for (Eigen::Index j = 1; j < p.coeffs.size(); j += 2)
    if (p.coeffs[j] != 0.0) return false;
  return true;
}

double DistributionSpec::support_lo() const {
  if (const auto* u = std::get_if<Uniform>(&law_)) return -u->a;
  return std::get<PolynomialDensity>(law_).lo;
}

double DistributionSpec::support_hi() const {
  if (const auto* u = std::get_if<Uniform>(&law_)) return u->a;
  return std::get<PolynomialDensity>(law_).hi;
}

double DistributionSpec::density(double x) const {
  if (x < support_lo() || x > support_hi()) return 0.0;
  return analytic_density(x);
}

double DistributionSpec::cdf(double x) const {
  const double lo = support_lo();
  const double hi = support_hi();
  if (x <= lo) return 0.0;
  if (x >= hi) return 1.0;
  if (const auto* u = std::get_if<Uniform>(&law_)) return (x + u->a) / (2.0 * u->a);
  const auto& c = std::get<PolynomialDensity>(law_).coeffs;
  return poly_antiderivative(c, x) - poly_antiderivative(c, lo);
}

double DistributionSpec::inverse_cdf(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw NumericalError("inverse_cdf argument outside [0,1]");
  if (const auto* uni = std::get_if<Uniform>(&law_)) return -uni->a + 2.0 * uni->a * u;

  double lo = support_lo();
  double hi = support_hi();
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = cdf(x) - u;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    if (hi - lo < 1e-10) return 0.5 * (lo + hi);
    const double g = analytic_density(x);
    double next = g > 0.0 ? x - f / g : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-13) return next;
    x = next;
  }
  throw NumericalError("inverse CDF iteration did not converge for u=" + std::to_string(u));
}

}  // namespace anderson
