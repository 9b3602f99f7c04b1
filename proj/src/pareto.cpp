#include "paretoscope/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "paretoscope/error.hpp"
#include "paretoscope/random.hpp"

namespace paretoscope {

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw invalid_input("objective vector length mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")");
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

std::vector<std::size_t> nondominated_indices(std::span<const ObjectiveVector> vectors) {
  for (const auto& v : vectors)
    if (v.size() != vectors.front().size()) throw invalid_input("objective vector length mismatch in point set");

  // After a lexicographic sort, a vector can only be dominated by vectors
  // that precede it, and any dominated predecessor is itself dominated by a
  // kept one, so comparing against the kept set suffices.
  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vectors[a] < vectors[b]; });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool dominated = false;
    for (std::size_t k : kept) {
      if (dominates(vectors[k], vectors[idx])) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

ParetoFront pareto_front(std::span<const FrontMember> points, std::vector<std::string> objective_names) {
  std::vector<ObjectiveVector> vectors;
  vectors.reserve(points.size());
  for (const auto& p : points) vectors.push_back(p.objectives);
  ParetoFront front{std::move(objective_names), {}};
  for (std::size_t i : nondominated_indices(vectors)) front.members.push_back(points[i]);
  return front;
}

namespace {

void check_dimension(std::span<const ObjectiveVector> points, std::span<const double> ref) {
  for (const auto& p : points)
    if (p.size() != ref.size())
      throw invalid_input("hypervolume: point has " + std::to_string(p.size()) + " objectives, reference has " +
                          std::to_string(ref.size()));
}

std::vector<ObjectiveVector> strictly_below(std::span<const ObjectiveVector> points, std::span<const double> ref) {
  std::vector<ObjectiveVector> out;
  for (const auto& p : points) {
    bool below = true;
    for (std::size_t i = 0; i < ref.size(); ++i) below = below && p[i] < ref[i];
    if (below) out.push_back(p);
  }
  return out;
}

double sweep_2d(std::vector<std::pair<double, double>> pts, double rx, double ry) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double best_y = ry;
  for (const auto& [x, y] : pts) {
    if (y < best_y) {
      area += (rx - x) * (best_y - y);
      best_y = y;
    }
  }
  return area;
}

}  // namespace

double hypervolume_2d(std::span<const ObjectiveVector> points, std::span<const double> ref) {
  if (ref.size() != 2) throw invalid_input("hypervolume_2d requires a 2-D reference point");
  check_dimension(points, ref);
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : strictly_below(points, ref)) pts.emplace_back(p[0], p[1]);
  return sweep_2d(std::move(pts), ref[0], ref[1]);
}

double hypervolume_3d(std::span<const ObjectiveVector> points, std::span<const double> ref) {
  if (ref.size() != 3) throw invalid_input("hypervolume_3d requires a 3-D reference point");
  check_dimension(points, ref);
  auto pts = strictly_below(points, ref);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[2] < b[2]; });
  // Between consecutive z levels the dominated cross-section is the 2-D
  // hypervolume of every point at or below that level.
  double volume = 0.0;
  std::vector<std::pair<double, double>> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.emplace_back(pts[i][0], pts[i][1]);
    const double z_next = i + 1 < pts.size() ? pts[i + 1][2] : ref[2];
    const double depth = z_next - pts[i][2];
    if (depth > 0.0) volume += depth * sweep_2d(slice, ref[0], ref[1]);
  }
  return volume;
}

HypervolumeResult hypervolume_monte_carlo(std::span<const ObjectiveVector> points, std::span<const double> ref,
                                          const MonteCarloOptions& mc) {
  check_dimension(points, ref);
  const auto pts = strictly_below(points, ref);
  HypervolumeResult result{0.0, 0.0, false, mc.samples};
  if (pts.empty() || mc.samples == 0) return result;

  const std::size_t d = ref.size();
  std::vector<double> lower(ref.begin(), ref.end());
  for (const auto& p : pts)
    for (std::size_t i = 0; i < d; ++i) lower[i] = std::min(lower[i], p[i]);
  double box = 1.0;
  for (std::size_t i = 0; i < d; ++i) box *= ref[i] - lower[i];

  RandomStream rng(mc.seed);
  std::vector<double> z(d);
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < mc.samples; ++s) {
    for (std::size_t i = 0; i < d; ++i) z[i] = lower[i] + rng.uniform01() * (ref[i] - lower[i]);
    for (const auto& p : pts) {
      bool covered = true;
      for (std::size_t i = 0; i < d && covered; ++i) covered = p[i] <= z[i];
      if (covered) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(mc.samples);
  result.value = box * frac;
  result.std_error = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(mc.samples));
  return result;
}

HypervolumeResult hypervolume(std::span<const ObjectiveVector> points, std::span<const double> ref,
                              const MonteCarloOptions& mc) {
  check_dimension(points, ref);
  switch (ref.size()) {
    case 0:
      throw invalid_input("hypervolume: reference point is empty");
    case 1: {
      double best = ref[0];
      for (const auto& p : points) best = std::min(best, p[0]);
      return {ref[0] - best, 0.0, true, 0};
    }
    case 2:
      return {hypervolume_2d(points, ref), 0.0, true, 0};
    case 3:
      return {hypervolume_3d(points, ref), 0.0, true, 0};
    default:
      return hypervolume_monte_carlo(points, ref, mc);
  }
}

HypervolumeResult hypervolume(const ParetoFront& front, std::span<const double> ref, const MonteCarloOptions& mc) {
  std::vector<ObjectiveVector> pts;
  pts.reserve(front.members.size());
  for (const auto& m : front.members) pts.push_back(m.objectives);
  return hypervolume(pts, ref, mc);
}

ObjectiveVector default_reference_point(std::span<const ObjectiveVector> points) {
  if (points.empty()) throw invalid_input("reference point needs at least one objective vector");
  const std::size_t d = points.front().size();
  ObjectiveVector hi(points.front()), lo(points.front());
  for (const auto& p : points) {
    if (p.size() != d) throw invalid_input("objective vector length mismatch in point set");
    for (std::size_t i = 0; i < d; ++i) {
      hi[i] = std::max(hi[i], p[i]);
      lo[i] = std::min(lo[i], p[i]);
    }
  }
  ObjectiveVector ref(d);
  for (std::size_t i = 0; i < d; ++i) {
    double margin = 0.1 * std::abs(hi[i]);
    if (margin == 0.0) margin = 0.1 * (hi[i] - lo[i]);
    if (margin == 0.0) margin = 1.0;
    ref[i] = hi[i] + margin;
  }
  return ref;
}

}  // namespace paretoscope
