#pragma once

#include "anderson/expansion.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>

namespace anderson {

// Cube {-(L-1)/2, ..., (L-1)/2}^d with Dirichlet truncation. Sites are
// indexed row-major, axis 0 slowest.
struct BoxSpec {
  int d = 1;
  int L = 3;

  // L odd and >= 3 so the origin is the centre; L^d must fit the index type.
  static BoxSpec make(int d, int L);

  Eigen::Index sites() const;
  Eigen::Index index(const LatticeSite& s) const;
  LatticeSite site(Eigen::Index i) const;
  bool contains(const LatticeSite& s) const;
  Eigen::Index centre() const { return index(origin(d)); }
};

// Mean and standard error of i.i.d. samples. std_error is the larger of the
// real and imaginary sample standard deviations over sqrt(samples).
struct McEstimate {
  cplx mean{};
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static McEstimate from_samples(std::span<const cplx> values, std::uint64_t seed);
};

// Seed of sample `index` within a run seeded by `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// One i.i.d. draw per box site, in site-index order, by inverse CDF.
Eigen::VectorXd sample_potential(const BoxSpec& box, const DistributionSpec& dist, std::uint64_t seed);

// x = (H_box - z)^-1 rhs. d = 1 by tridiagonal elimination, d >= 2 by
// BiCGSTAB with a diagonal preconditioner. NumericalError unless the relative
// residual is below 1e-10.
Eigen::VectorXcd box_solve(const BoxSpec& box, const Eigen::VectorXd& potential, double h, cplx z,
                           const Eigen::VectorXcd& rhs);

// (H_box - z)^-1(site, site).
cplx box_resolvent_element(const BoxSpec& box, const Eigen::VectorXd& potential, double h, cplx z,
                           const LatticeSite& site);

// (A u)(x) = sum_y A(x, y) u(y), y restricted to the box.
Eigen::VectorXcd apply_local(const BoxSpec& box, const LocalOperator& a, const Eigen::VectorXcd& u);

McEstimate mc_resolvent(const BoxSpec& box, const ModelParams& params, cplx z, std::size_t samples,
                        std::uint64_t seed);

// Samples ((H - z1)^-1 A1 (H - z2)^-1 A2)(0, 0).
McEstimate mc_correlation(const BoxSpec& box, const ModelParams& params, const LocalOperator& a1,
                          const LocalOperator& a2, cplx z1, cplx z2, std::size_t samples, std::uint64_t seed);

// Number of eigenvalues <= e of the tridiagonal matrix diag(potential) + h
// (off-diagonal), from the signs of the LDL^T pivots of T - e.
long sturm_count(const Eigen::VectorXd& potential, double h, double e);

// Eigenvalue-counting fraction of a d = 1 box, averaged over samples.
McEstimate sturm_ids(const BoxSpec& box, const ModelParams& params, double e, std::size_t samples,
                     std::uint64_t seed);

// Density of states from eigenvalue counts in [lambda - w/2, lambda + w/2],
// and again with width w/2; bias = |full - half|.
struct DosHistogram {
  McEstimate full;
  McEstimate half;
  double bias = 0.0;
};
DosHistogram dos_histogram(const BoxSpec& box, const ModelParams& params, double lambda, double bin,
                           std::size_t samples, std::uint64_t seed);

}  // namespace anderson
