#include "anderson/lattice_walks.hpp"

#include "anderson/error.hpp"
#include "anderson/parallel.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace anderson {

LatticeSite origin(int d) { return LatticeSite::Zero(d); }

LatticeSite make_site(std::initializer_list<int> coords) {
  LatticeSite s(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (int c : coords) s[i++] = c;
  return s;
}

bool SiteLess::operator()(const LatticeSite& a, const LatticeSite& b) const {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

bool WalkPath::valid() const {
  if (sites.empty()) return false;
  const auto d = sites.front().size();
  for (std::size_t j = 1; j < sites.size(); ++j) {
    if (sites[j].size() != d || l1_distance(sites[j], sites[j - 1]) != 1) return false;
  }
  return true;
}

int VisitProfile::count(const LatticeSite& site) const {
  for (const auto& e : entries)
    if (e.site == site) return e.count;
  return 0;
}

VisitProfile visit_profile(const WalkPath& path) {
  VisitProfile p;
  for (const auto& s : path.sites) {
    auto it = std::find_if(p.entries.begin(), p.entries.end(),
                           [&](const VisitProfile::Entry& e) { return e.site == s; });
    if (it == p.entries.end())
      p.entries.push_back({s, 1});
    else
      ++it->count;
    ++p.total;
  }
  return p;
}

int WalkLimits::max_length_for(int d) const {
  if (d >= 1 && static_cast<std::size_t>(d) <= max_length.size()) return max_length[d - 1];
  return static_cast<int>(std::floor(28.0 * std::log(2.0) / std::log(2.0 * d)));
}

void WalkLimits::check(int d, int k) const {
  if (d < 1 || d > kMaxDimension)
    throw CapacityError("lattice dimension " + std::to_string(d) + " outside [1, " +
                        std::to_string(kMaxDimension) + "]");
  if (k < 0) throw ConfigError("walk length must be nonnegative, got " + std::to_string(k));
  const int cap = std::min(max_length_for(d), 100);
  if (k > cap)
    throw CapacityError("walk length " + std::to_string(k) + " exceeds the cap " +
                        std::to_string(cap) + " for d=" + std::to_string(d));
}

namespace {

// Incrementally maintained visit profile. Sites are keyed by 8-bit packed
// offsets from an anchor; walks handled here never leave a radius of 127.
class ProfileStack {
 public:
  explicit ProfileStack(const LatticeSite& anchor) : anchor_(anchor) {
    profile_.entries.reserve(32);
    keys_.reserve(32);
  }

  void enter(const LatticeSite& s) {
    const auto key = pack(s);
    for (auto i = keys_.size(); i-- > 0;) {
      if (keys_[i] == key) {
        ++profile_.entries[i].count;
        ++profile_.total;
        return;
      }
    }
    keys_.push_back(key);
    profile_.entries.push_back({s, 1});
    ++profile_.total;
  }

  void leave(const LatticeSite& s) {
    const auto key = pack(s);
    for (auto i = keys_.size(); i-- > 0;) {
      if (keys_[i] == key) {
        if (--profile_.entries[i].count == 0) {
          // first visit happened after every other live entry
          assert(i + 1 == keys_.size());
          keys_.pop_back();
          profile_.entries.pop_back();
        }
        --profile_.total;
        return;
      }
    }
    assert(false && "leave() without matching enter()");
  }

  const VisitProfile& profile() const { return profile_; }

 private:
  std::uint64_t pack(const LatticeSite& s) const {
    std::uint64_t key = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      key = (key << 8) | (static_cast<std::uint64_t>(s[i] - anchor_[i] + 128) & 0xffu);
    return key;
  }

  LatticeSite anchor_;
  VisitProfile profile_;
  std::vector<std::uint64_t> keys_;
};

inline void apply_step(LatticeSite& pos, int dir, int sign) {
  pos[dir / 2] += (dir % 2 == 0 ? 1 : -1) * sign;
}

// Depth-first over the 2d step directions. feasible(pos, remaining) prunes a
// branch after the step has been taken; leaf() fires at depth zero.
template <class Feasible, class Leaf>
void walk_dfs(int d, int remaining, LatticeSite& pos, ProfileStack& prof, std::vector<LatticeSite>* path,
              const Feasible& feasible, const Leaf& leaf) {
  if (remaining == 0) {
    leaf();
    return;
  }
  for (int dir = 0; dir < 2 * d; ++dir) {
    apply_step(pos, dir, +1);
    if (feasible(pos, remaining - 1)) {
      prof.enter(pos);
      if (path) path->push_back(pos);
      walk_dfs(d, remaining - 1, pos, prof, path, feasible, leaf);
      if (path) path->pop_back();
      prof.leave(pos);
    }
    apply_step(pos, dir, -1);
  }
}

struct ReachEnd {
  const LatticeSite& end;
  bool operator()(const LatticeSite& pos, int remaining) const {
    const int dist = l1_distance(pos, end);
    return dist <= remaining && (remaining - dist) % 2 == 0;
  }
};

// Number of leading steps used to split a walk into partitions; at most 64
// partitions, independent of the worker budget.
int partition_depth(int d, int k) {
  int s = 0;
  double n = 2.0 * d;
  while (n <= 64.0) {
    ++s;
    n *= 2.0 * d;
  }
  return std::min(s, k);
}

template <class Feasible>
std::vector<std::vector<std::int8_t>> collect_prefixes(int d, int depth, const LatticeSite& start,
                                                       const Feasible& feasible, int k) {
  std::vector<std::vector<std::int8_t>> prefixes;
  std::vector<std::int8_t> current;
  LatticeSite pos = start;
  auto rec = [&](auto&& self, int level) -> void {
    if (level == depth) {
      prefixes.push_back(current);
      return;
    }
    for (int dir = 0; dir < 2 * d; ++dir) {
      apply_step(pos, dir, +1);
      if (feasible(pos, k - level - 1)) {
        current.push_back(static_cast<std::int8_t>(dir));
        self(self, level + 1);
        current.pop_back();
      }
      apply_step(pos, dir, -1);
    }
  };
  if (feasible(pos, k)) rec(rec, 0);
  return prefixes;
}

std::complex<double> ordered_sum(const std::vector<std::complex<double>>& partials) {
  std::complex<double> total{0.0, 0.0};
  for (const auto& p : partials) total += p;
  return total;
}

void check_endpoints(int d, const LatticeSite& start, const LatticeSite& end) {
  if (start.size() != d || end.size() != d)
    throw ConfigError("endpoint dimension does not match d=" + std::to_string(d));
}

}  // namespace

void enumerate_paths(int d, int k, const LatticeSite& start, const LatticeSite& end,
                     const PathVisitor& visitor, const WalkLimits& limits) {
  limits.check(d, k);
  check_endpoints(d, start, end);
  const ReachEnd feasible{end};
  if (!feasible(start, k)) return;

  WalkPath path;
  path.sites.reserve(static_cast<std::size_t>(k) + 1);
  path.sites.push_back(start);
  LatticeSite pos = start;
  ProfileStack prof(start);
  prof.enter(start);
  walk_dfs(d, k, pos, prof, &path.sites, feasible, [&] { visitor(path); });
}

std::uint64_t count_paths(int d, int k, const LatticeSite& start, const LatticeSite& end,
                          const WalkLimits& limits) {
  std::uint64_t n = 0;
  enumerate_paths(d, k, start, end, [&](const WalkPath&) { ++n; }, limits);
  return n;
}

std::complex<double> fold_paths(int d, int k, const LatticeSite& start, const LatticeSite& end,
                                const ProfileWeight& weight, const WalkLimits& limits) {
  limits.check(d, k);
  check_endpoints(d, start, end);
  const ReachEnd feasible{end};
  const int depth = partition_depth(d, k);
  const auto prefixes = collect_prefixes(d, depth, start, feasible, k);

  std::vector<std::complex<double>> partials(prefixes.size());
  parallel_for(prefixes.size(), [&](std::size_t i) {
    LatticeSite pos = start;
    ProfileStack prof(start);
    prof.enter(start);
    for (auto dir : prefixes[i]) {
      apply_step(pos, dir, +1);
      prof.enter(pos);
    }
    std::complex<double> acc{0.0, 0.0};
    walk_dfs(d, k - depth, pos, prof, nullptr, feasible, [&] { acc += weight(prof.profile()); });
    partials[i] = acc;
  });
  return ordered_sum(partials);
}

std::complex<double> fold_correlation_paths(int d, int k, int l, int R, const LatticeSite& start,
                                            const LatticeSite& end, const CorrelationWeight& weight,
                                            const WalkLimits& limits) {
  if (l < 0) throw ConfigError("second leg length must be nonnegative");
  if (R < 0 || R > 16) throw ConfigError("operator range R must lie in [0, 16]");
  limits.check(d, k + l);
  check_endpoints(d, start, end);

  // First leg: end must stay reachable through both junctions and the
  // second leg.
  auto first_feasible = [&](const LatticeSite& pos, int remaining) {
    const int dist = l1_distance(pos, end);
    const int budget = remaining + l;
    if (R == 0) return dist <= budget && (budget - dist) % 2 == 0;
    return dist <= budget + 2 * d * R;
  };
  // Second leg: the sup-norm R-box around end must be reachable.
  auto second_feasible = [&](const LatticeSite& pos, int remaining) {
    int dist = 0;
    for (int i = 0; i < d; ++i) dist += std::max(0, std::abs(pos[i] - end[i]) - R);
    if (R == 0) return dist <= remaining && (remaining - dist) % 2 == 0;
    return dist <= remaining;
  };

  const int depth = partition_depth(d, k);
  const auto prefixes = collect_prefixes(d, depth, start, first_feasible, k);
  const int box = 2 * R + 1;
  int offsets = 1;
  for (int i = 0; i < d; ++i) offsets *= box;

  std::vector<std::complex<double>> partials(prefixes.size());
  parallel_for(prefixes.size(), [&](std::size_t p) {
    LatticeSite pos = start;
    ProfileStack first(start);
    first.enter(start);
    for (auto dir : prefixes[p]) {
      apply_step(pos, dir, +1);
      first.enter(pos);
    }
    std::complex<double> acc{0.0, 0.0};

    walk_dfs(d, k - depth, pos, first, nullptr, first_feasible, [&] {
      const LatticeSite n_k = pos;
      // m_0 ranges over the R-box around n_k, axis 0 most significant.
      for (int code = 0; code < offsets; ++code) {
        LatticeSite m0 = n_k;
        int rest = code;
        for (int i = d - 1; i >= 0; --i) {
          m0[i] += rest % box - R;
          rest /= box;
        }
        if (!second_feasible(m0, l)) continue;
        LatticeSite cur = m0;
        ProfileStack second(start);
        second.enter(m0);
        walk_dfs(d, l, cur, second, nullptr, second_feasible, [&] {
          if (sup_distance(cur, end) > R) return;
          acc += weight(first.profile(), second.profile(), Junction{n_k, m0, cur, end});
        });
      }
    });
    partials[p] = acc;
  });
  return ordered_sum(partials);
}

}  // namespace anderson
