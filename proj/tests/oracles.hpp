#pragma once

// Reference implementations used only by the tests. Each one takes the
// slowest obvious route so it shares no code path with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

inline bool weakly_better_everywhere(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  return weakly_better_everywhere(a, b) && a != b;
}

/// O(n^2) pairwise check; ascending indices.
inline std::vector<std::size_t> brute_force_front(const std::vector<std::vector<double>>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) dominated = j != i && dominates(pts[j], pts[i]);
    if (!dominated) out.push_back(i);
  }
  return out;
}

/// Inclusion-exclusion over all nonempty subsets: the union of boxes
/// [p, ref] has volume sum_S (-1)^{|S|+1} vol(intersection of S).
/// Exponential; keep n small.
inline double inclusion_exclusion_hypervolume(const std::vector<std::vector<double>>& pts,
                                              const std::vector<double>& ref) {
  std::vector<std::vector<double>> below;
  for (const auto& p : pts) {
    bool ok = true;
    for (std::size_t i = 0; i < ref.size(); ++i) ok = ok && p[i] < ref[i];
    if (ok) below.push_back(p);
  }
  const std::size_t n = below.size();
  double total = 0.0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<double> corner(ref.size(), -INFINITY);
    int bits = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!(mask & (std::uint64_t{1} << k))) continue;
      ++bits;
      for (std::size_t i = 0; i < ref.size(); ++i) corner[i] = std::max(corner[i], below[k][i]);
    }
    double vol = 1.0;
    for (std::size_t i = 0; i < ref.size(); ++i) vol *= std::max(0.0, ref[i] - corner[i]);
    total += (bits % 2 ? 1.0 : -1.0) * vol;
  }
  return total;
}

/// Grid-cell counting for 2-D points whose coordinates are integers:
/// counts unit cells [x, x+1) x [y, y+1) below ref that some point covers.
inline double grid_count_hypervolume_2d(const std::vector<std::vector<double>>& pts, int rx, int ry) {
  double cells = 0.0;
  for (int x = 0; x < rx; ++x)
    for (int y = 0; y < ry; ++y) {
      bool covered = false;
      for (const auto& p : pts) covered = covered || (p[0] <= x && p[1] <= y);
      cells += covered;
    }
  return cells;
}

inline double kl_direct(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) d += p[i] * std::log(p[i] / q[i]);
  return d;
}


}  // namespace oracle
