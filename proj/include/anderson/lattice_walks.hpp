#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

namespace anderson {

inline constexpr int kMaxDimension = 8;

// A point of Z^d. Fixed maximum size, so copies never touch the heap.
using LatticeSite = Eigen::Matrix<int, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDimension, 1>;

LatticeSite origin(int d);
LatticeSite make_site(std::initializer_list<int> coords);

inline int l1_distance(const LatticeSite& a, const LatticeSite& b) {
  return (a - b).cwiseAbs().sum();
}
inline int sup_distance(const LatticeSite& a, const LatticeSite& b) {
  return a.size() == 0 ? 0 : (a - b).cwiseAbs().maxCoeff();
}

// Lexicographic order on coordinates; LatticeSite has no operator<.
struct SiteLess {
  bool operator()(const LatticeSite& a, const LatticeSite& b) const;
};

struct WalkPath {
  std::vector<LatticeSite> sites;  // n_0 .. n_k

  int length() const { return static_cast<int>(sites.size()) - 1; }
  // Nearest-neighbour steps throughout and a common dimension.
  bool valid() const;
};

// Visit counts #(path, site) over all sites n_0..n_k, initial site included,
// so total == k + 1. Entries appear in first-visit order.
struct VisitProfile {
  struct Entry {
    LatticeSite site;
    int count = 0;
  };
  std::vector<Entry> entries;
  int total = 0;

  int count(const LatticeSite& site) const;
  std::size_t distinct() const { return entries.size(); }
};

VisitProfile visit_profile(const WalkPath& path);

// Hard caps on walk length per dimension; the (2d)^k blow-up must fail loudly.
struct WalkLimits {
  std::vector<int> max_length{24, 14, 10};  // index d-1

  // Dimensions past the table get the largest k with (2d)^k <= 2^28.
  int max_length_for(int d) const;
  // Throws CapacityError when d or k is out of range.
  void check(int d, int k) const;
};

using PathVisitor = std::function<void(const WalkPath&)>;
using ProfileWeight = std::function<std::complex<double>(const VisitProfile&)>;

struct Junction {
  const LatticeSite& first_end;     // n_k
  const LatticeSite& second_start;  // m_0
  const LatticeSite& second_end;    // m_l
  const LatticeSite& target;        // m_{l+1}
};
// Receives the first-leg profile (n_0..n_k), the second-leg profile
// (m_0..m_l) and the four junction sites.
using CorrelationWeight =
    std::function<std::complex<double>(const VisitProfile&, const VisitProfile&, const Junction&)>;

// Calls visitor once per nearest-neighbour walk of length k from start to
// end, in lexicographic order of step directions (+e_0, -e_0, +e_1, ...).
void enumerate_paths(int d, int k, const LatticeSite& start, const LatticeSite& end,
                     const PathVisitor& visitor, const WalkLimits& limits = {});

std::uint64_t count_paths(int d, int k, const LatticeSite& start, const LatticeSite& end,
                          const WalkLimits& limits = {});

// Sum of weight(visit_profile(path)) over all walks of length k from start to
// end. The walks are split into a fixed set of prefix partitions whose
// partial sums are added in prefix order, so the result is bitwise identical
// for any worker count.
std::complex<double> fold_paths(int d, int k, const LatticeSite& start, const LatticeSite& end,
                                const ProfileWeight& weight, const WalkLimits& limits = {});

// Sum over the two-leg paths (n_0..n_k, m_0..m_l, m_{l+1}) with n_0 = start,
// m_{l+1} = end, nearest-neighbour steps inside each leg and both junctions
// within sup-norm distance R.
std::complex<double> fold_correlation_paths(int d, int k, int l, int R, const LatticeSite& start,
                                            const LatticeSite& end, const CorrelationWeight& weight,
                                            const WalkLimits& limits = {});

}  // namespace anderson
