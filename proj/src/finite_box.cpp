#include "anderson/finite_box.hpp"

#include "anderson/error.hpp"
#include "anderson/parallel.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace anderson {

BoxSpec BoxSpec::make(int d, int L) {
  if (d < 1 || d > kMaxDimension) throw ConfigError("dimension out of range", "model.d");
  if (L < 3 || L % 2 == 0) throw ConfigError("must be odd and >= 3", "box.L");
  if (std::pow(static_cast<double>(L), d) > 5e7) throw CapacityError("box has more than 5e7 sites");
  return BoxSpec{d, L};
}

Eigen::Index BoxSpec::sites() const {
  Eigen::Index n = 1;
  for (int i = 0; i < d; ++i) n *= L;
  return n;
}

Eigen::Index BoxSpec::index(const LatticeSite& s) const {
  const int half = L / 2;
  Eigen::Index idx = 0;
  for (int i = 0; i < d; ++i) idx = idx * L + (s[i] + half);
  return idx;
}

LatticeSite BoxSpec::site(Eigen::Index i) const {
  const int half = L / 2;
  LatticeSite s(d);
  for (int axis = d - 1; axis >= 0; --axis) {
    s[axis] = static_cast<int>(i % L) - half;
    i /= L;
  }
  return s;
}

bool BoxSpec::contains(const LatticeSite& s) const { return s.size() == d && s.cwiseAbs().maxCoeff() <= L / 2; }

McEstimate McEstimate::from_samples(std::span<const cplx> values, std::uint64_t seed) {
  const std::size_t n = values.size();
  if (n < 2) throw ConfigError("need at least two samples", "box.samples");
  cplx mean = 0.0;
  for (const auto& v : values) mean += v;
  mean /= static_cast<double>(n);
  double var_re = 0.0, var_im = 0.0;
  for (const auto& v : values) {
    var_re += std::pow(v.real() - mean.real(), 2);
    var_im += std::pow(v.imag() - mean.imag(), 2);
  }
  const double denom = static_cast<double>(n - 1);
  const double sd = std::sqrt(std::max(var_re, var_im) / denom);
  return {mean, sd / std::sqrt(static_cast<double>(n)), n, seed};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Eigen::VectorXd sample_potential(const BoxSpec& box, const DistributionSpec& dist, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd v(box.sites());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist.inverse_cdf(unit(engine));
  return v;
}

namespace {

// y = (H - z) x on the box.
Eigen::VectorXcd apply_shifted(const BoxSpec& box, const Eigen::VectorXd& potential, double h, cplx z,
                               const Eigen::VectorXcd& x) {
  Eigen::VectorXcd y = (potential.cast<cplx>().array() - z) * x.array();
  if (h == 0.0) return y;
  Eigen::Index stride = 1;
  for (int axis = box.d - 1; axis >= 0; --axis) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const auto coord = (i / stride) % box.L;
      if (coord > 0) y[i] += h * x[i - stride];
      if (coord + 1 < box.L) y[i] += h * x[i + stride];
    }
    stride *= box.L;
  }
  return y;
}

Eigen::VectorXcd solve_tridiagonal(const Eigen::VectorXd& potential, double h, cplx z, const Eigen::VectorXcd& rhs) {
  const Eigen::Index n = potential.size();
  Eigen::VectorXcd pivot(n), x(n);
  pivot[0] = potential[0] - z;
  x[0] = rhs[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    const cplx factor = h / pivot[i - 1];
    pivot[i] = (potential[i] - z) - factor * h;
    x[i] = rhs[i] - factor * x[i - 1];
  }
  x[n - 1] /= pivot[n - 1];
  for (Eigen::Index i = n - 1; i-- > 0;) x[i] = (x[i] - h * x[i + 1]) / pivot[i];
  return x;
}

Eigen::VectorXcd solve_sparse(const BoxSpec& box, const Eigen::VectorXd& potential, double h, cplx z,
                              const Eigen::VectorXcd& rhs) {
  const Eigen::Index n = box.sites();
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * (2 * box.d + 1));
  Eigen::Index stride = 1;
  for (int axis = box.d - 1; axis >= 0; --axis) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((i / stride) % box.L + 1 < box.L) {
        triplets.emplace_back(i, i + stride, h);
        triplets.emplace_back(i + stride, i, h);
      }
    }
    stride *= box.L;
  }
  for (Eigen::Index i = 0; i < n; ++i) triplets.emplace_back(i, i, potential[i] - z);
  Eigen::SparseMatrix<cplx> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::BiCGSTAB<Eigen::SparseMatrix<cplx>, Eigen::DiagonalPreconditioner<cplx>> solver;
  solver.setTolerance(1e-13);
  solver.setMaxIterations(static_cast<Eigen::Index>(10 * n + 100));
  solver.compute(a);
  return solver.solve(rhs);
}

}  // namespace

Eigen::VectorXcd box_solve(const BoxSpec& box, const Eigen::VectorXd& potential, double h, cplx z,
                           const Eigen::VectorXcd& rhs) {
  if (z.imag() == 0.0) throw DomainError("box resolvent needs Im z != 0");
  if (potential.size() != box.sites() || rhs.size() != box.sites())
    throw ConfigError("potential/rhs length does not match the box");
  Eigen::VectorXcd x = box.d == 1 ? solve_tridiagonal(potential, h, z, rhs) : solve_sparse(box, potential, h, z, rhs);
  const double rnorm = (apply_shifted(box, potential, h, z, x) - rhs).norm();
  const double bnorm = rhs.norm();
  if (!(rnorm <= 1e-10 * bnorm))
    throw NumericalError("shifted solve residual " + std::to_string(bnorm > 0 ? rnorm / bnorm : rnorm) +
                         " above 1e-10");
  return x;
}

cplx box_resolvent_element(const BoxSpec& box, const Eigen::VectorXd& potential, double h, cplx z,
                           const LatticeSite& site) {
  if (!box.contains(site)) throw ConfigError("site outside the box");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(box.sites());
  const auto i = box.index(site);
  rhs[i] = 1.0;
  return box_solve(box, potential, h, z, rhs)[i];
}

Eigen::VectorXcd apply_local(const BoxSpec& box, const LocalOperator& a, const Eigen::VectorXcd& u) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const LatticeSite x = box.site(i);
    for (const auto& e : a.stencil()) {
      const LatticeSite y = x + e.offset;
      if (box.contains(y)) out[i] += e.value * u[box.index(y)];
    }
  }
  return out;
}

namespace {

McEstimate run_samples(std::size_t samples, std::uint64_t seed, const std::function<cplx(std::uint64_t)>& one) {
  if (samples < 2) throw ConfigError("need at least two samples", "box.samples");
  std::vector<cplx> values(samples);
  parallel_for(samples, [&](std::size_t i) {
    try {
      values[i] = one(derive_seed(seed, i));
    } catch (const NumericalError& e) {
      throw NumericalError("sample " + std::to_string(i) + ": " + e.what());
    }
  });
  return McEstimate::from_samples(values, seed);
}

}  // namespace

McEstimate mc_resolvent(const BoxSpec& box, const ModelParams& params, cplx z, std::size_t samples,
                        std::uint64_t seed) {
  return run_samples(samples, seed, [&](std::uint64_t s) {
    const Eigen::VectorXd v = sample_potential(box, params.dist, s);
    return box_resolvent_element(box, v, params.h, z, origin(box.d));
  });
}

McEstimate mc_correlation(const BoxSpec& box, const ModelParams& params, const LocalOperator& a1,
                          const LocalOperator& a2, cplx z1, cplx z2, std::size_t samples, std::uint64_t seed) {
  if (a1.dimension() != box.d || a2.dimension() != box.d)
    throw ConfigError("operator dimension does not match the box");
  const Eigen::Index centre = box.centre();
  Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(box.sites());
  unit[centre] = 1.0;
  const Eigen::VectorXcd a2_unit = apply_local(box, a2, unit);
  return run_samples(samples, seed, [&](std::uint64_t s) -> cplx {
    if (a2_unit.isZero(0.0)) return 0.0;
    const Eigen::VectorXd v = sample_potential(box, params.dist, s);
    const Eigen::VectorXcd w = box_solve(box, v, params.h, z2, a2_unit);
    const Eigen::VectorXcd u = apply_local(box, a1, w);
    if (u.isZero(0.0)) return 0.0;
    return box_solve(box, v, params.h, z1, u)[centre];
  });
}

long sturm_count(const Eigen::VectorXd& potential, double h, double e) {
  constexpr double kTinyPivot = 1e-300;
  long negatives = 0;
  double q = 1.0;
  for (Eigen::Index i = 0; i < potential.size(); ++i) {
    q = (potential[i] - e) - (i > 0 ? h * h / q : 0.0);
    if (std::abs(q) < kTinyPivot) q = -kTinyPivot;
    if (q < 0.0) ++negatives;
  }
  return negatives;
}

McEstimate sturm_ids(const BoxSpec& box, const ModelParams& params, double e, std::size_t samples,
                     std::uint64_t seed) {
  if (box.d != 1) throw ConfigError("eigenvalue counting needs d = 1", "model.d");
  const double n = static_cast<double>(box.sites());
  return run_samples(samples, seed, [&](std::uint64_t s) {
    const Eigen::VectorXd v = sample_potential(box, params.dist, s);
    return cplx(static_cast<double>(sturm_count(v, params.h, e)) / n, 0.0);
  });
}

DosHistogram dos_histogram(const BoxSpec& box, const ModelParams& params, double lambda, double bin,
                           std::size_t samples, std::uint64_t seed) {
  if (box.d != 1) throw ConfigError("eigenvalue counting needs d = 1", "model.d");
  if (!(bin > 0.0)) throw ConfigError("must be positive", "validate.bin");
  if (samples < 2) throw ConfigError("need at least two samples", "box.samples");
  const double n = static_cast<double>(box.sites());
  std::vector<cplx> full(samples), half(samples);
  parallel_for(samples, [&](std::size_t i) {
    const Eigen::VectorXd v = sample_potential(box, params.dist, derive_seed(seed, i));
    auto density = [&](double w) {
      const long inside = sturm_count(v, params.h, lambda + 0.5 * w) - sturm_count(v, params.h, lambda - 0.5 * w);
      return static_cast<double>(inside) / (n * w);
    };
    full[i] = density(bin);
    half[i] = density(0.5 * bin);
  });
  DosHistogram out{McEstimate::from_samples(full, seed), McEstimate::from_samples(half, seed), 0.0};
  out.bias = std::abs(out.full.mean.real() - out.half.mean.real());
  return out;
}

}  // namespace anderson
