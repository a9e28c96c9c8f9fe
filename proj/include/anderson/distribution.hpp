#pragma once

#include <Eigen/Core>

#include <complex>
#include <utility>
#include <variant>

namespace anderson {

// Uniform law on [-a, a].
struct Uniform {
  double a = 1.0;
};

// Density g(x) = sum_j coeffs[j] x^j on [lo, hi], zero elsewhere.
struct PolynomialDensity {
  double lo = -1.0;
  double hi = 1.0;
  Eigen::VectorXd coeffs;
};

// Single-site potential distribution. Both variants have a density that is
// the restriction of an entire function to the support, so any window whose
// closure stays inside the support is a valid analyticity region.
class DistributionSpec {
 public:
  // Throw ConfigError unless the density is nonnegative and normalised (1e-12).
  static DistributionSpec uniform(double a);
  static DistributionSpec polynomial(double lo, double hi, Eigen::VectorXd coeffs);

  const std::variant<Uniform, PolynomialDensity>& law() const { return law_; }
  bool is_uniform() const { return std::holds_alternative<Uniform>(law_); }
  // Symmetric under x -> -x.
  bool is_even() const;

  double support_lo() const;
  double support_hi() const;

  // Entire extension of the density from the interior of the support.
  template <typename Scalar>
  Scalar analytic_density(const Scalar& w) const;

  // The density as a function on the real line (zero off the support).
  double density(double x) const;
  double cdf(double x) const;
  // Safeguarded Newton/bisection to 1e-10 in x; NumericalError on failure.
  double inverse_cdf(double u) const;

 private:
  explicit DistributionSpec(std::variant<Uniform, PolynomialDensity> law) : law_(std::move(law)) {}
  std::variant<Uniform, PolynomialDensity> law_;
};

template <typename Scalar>
Scalar DistributionSpec::analytic_density(const Scalar& w) const {
  if (const auto* u = std::get_if<Uniform>(&law_)) return Scalar(1.0 / (2.0 * u->a));
  const auto& p = std::get<PolynomialDensity>(law_);
  Scalar acc(0.0);
  for (Eigen::Index j = p.coeffs.size(); j-- > 0;) acc = acc * w + Scalar(p.coeffs[j]);
  return acc;
}

}  // namespace anderson
