#pragma once

// Independent reference implementations used only by the tests. Nothing here
// calls into the library code under test except for plain data types.

#include "anderson/lattice_walks.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using anderson::LatticeSite;

// Every step sequence in {+e0, -e0, ..., -e_{d-1}}^k, counted as an integer
// in base 2d; keeps those ending at `end`.
inline std::vector<std::vector<LatticeSite>> naive_walks(int d, int k, const LatticeSite& start,
                                                          const LatticeSite& end) {
  std::vector<std::vector<LatticeSite>> out;
  const long total = static_cast<long>(std::pow(2 * d, k));
  for (long code = 0; code < total; ++code) {
    std::vector<LatticeSite> path{start};
    long c = code;
    LatticeSite cur = start;
    for (int s = 0; s < k; ++s) {
      const int dir = static_cast<int>(c % (2 * d));
      c /= 2 * d;
      cur[dir / 2] += dir % 2 == 0 ? 1 : -1;
      path.push_back(cur);
    }
    if (cur == end) out.push_back(std::move(path));
  }
  return out;
}

struct SiteCompare {
  bool operator()(const LatticeSite& a, const LatticeSite& b) const {
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return a[i] < b[i];
    return false;
  }
};

using Counts = std::map<LatticeSite, int, SiteCompare>;

inline Counts visit_counts(const std::vector<LatticeSite>& path) {
  Counts c;
  for (const auto& s : path) ++c[s];
  return c;
}

// Closed-form count of returning walks on Z: binomial(k, k/2).
inline double binomial(int n, int r) {
  double v = 1.0;
  for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
  return v;
}

// Composite adaptive Simpson on [lo, hi] for a complex integrand.
inline cplx simpson_rec(const std::function<cplx(double)>& f, double a, double b, cplx fa, cplx fm, cplx fb,
                        cplx whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const cplx flm = f(lm), frm = f(rm);
  const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const cplx diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline cplx simpson(const std::function<cplx(double)>& f, double lo, double hi, double tol = 1e-13,
                    int pieces = 64) {
  cplx sum = 0.0;
  const double w = (hi - lo) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double a = lo + p * w, b = a + w, m = 0.5 * (a + b);
    const cplx fa = f(a), fm = f(m), fb = f(b);
    sum += simpson_rec(f, a, b, fa, fm, fb, w / 6.0 * (fa + 4.0 * fm + fb), tol / pieces, 40);
  }
  return sum;
}

// integral of g(x) / (x - z)^l over [lo, hi] for Im z != 0.
inline cplx moment_by_simpson(const std::function<double(double)>& g, double lo, double hi, int l, cplx z) {
  return simpson([&](double x) { return cplx(g(x)) / std::pow(cplx(x) - z, l); }, lo, hi);
}

// Uniform law on [-a, a]: the l-th moment in closed form from the
// antiderivative, valid for every z off [-a, a] and continued to real z inside
// for l >= 2. For l = 1 the upper half-plane branch of the logarithm.
inline cplx uniform_moment(double a, int l, cplx z) {
  if (l == 0) return 1.0;
  if (l == 1) return (std::log(cplx(a) - z) - std::log(cplx(-a) - z)) / (2.0 * a);
  const double p = l - 1;
  return (std::pow(cplx(-a) - z, -p) - std::pow(cplx(a) - z, -p)) / (2.0 * a * p);
}

// Dense tight-binding Hamiltonian on the box {-(L-1)/2..(L-1)/2}^d,
// row-major with axis 0 slowest.
inline Eigen::MatrixXd dense_hamiltonian(int d, int L, const Eigen::VectorXd& v, double h) {
  const Eigen::Index n = v.size();
  Eigen::MatrixXd H = v.asDiagonal();
  Eigen::Index stride = 1;
  for (int axis = d - 1; axis >= 0; --axis) {
    for (Eigen::Index i = 0; i < n; ++i)
      if ((i / stride) % L + 1 < L) H(i, i + stride) = H(i + stride, i) = h;
    stride *= L;
  }
  return H;
}

inline Eigen::MatrixXcd dense_resolvent(const Eigen::MatrixXd& H, cplx z) {
  Eigen::MatrixXcd A = H.cast<cplx>();
  A.diagonal().array() -= z;
  return A.partialPivLu().inverse();
}

}  // namespace oracle
