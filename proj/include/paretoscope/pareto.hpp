#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paretoscope/space.hpp"

namespace paretoscope {

/// Objective values in minimization orientation (maximized objectives are
/// negated when they are ingested, never here).
using ObjectiveVector = std::vector<double>;

/// True iff `a` is no worse than `b` everywhere and strictly better somewhere.
/// Throws Error(invalid_input) on a length mismatch.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Indices of the non-dominated vectors, ascending. Exact duplicates of a
/// non-dominated vector are all kept.
std::vector<std::size_t> nondominated_indices(std::span<const ObjectiveVector> vectors);

struct FrontMember {
  ConfigPoint point;
  ObjectiveVector objectives;
};

struct ParetoFront {
  std::vector<std::string> objective_names;
  std::vector<FrontMember> members;  // first-seen input order
};

ParetoFront pareto_front(std::span<const FrontMember> points, std::vector<std::string> objective_names = {});

struct HypervolumeResult {
  double value = 0.0;
  double std_error = 0.0;       // zero for exact results
  bool exact = true;
  std::uint64_t samples = 0;    // Monte Carlo sample count (0 if exact)
};

struct MonteCarloOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0x5eed;
};

/// Dominated volume bounded by `ref`. Points not strictly below `ref` in
/// every objective contribute nothing. Exact in two and three dimensions;
/// Monte Carlo (per `mc`) from four dimensions up.
HypervolumeResult hypervolume(std::span<const ObjectiveVector> points, std::span<const double> ref,
                              const MonteCarloOptions& mc = {});
HypervolumeResult hypervolume(const ParetoFront& front, std::span<const double> ref, const MonteCarloOptions& mc = {});

/// Exact 2-D sweep. Inputs need not be a front.
double hypervolume_2d(std::span<const ObjectiveVector> points, std::span<const double> ref);
/// Exact 3-D slicing along the last objective.
double hypervolume_3d(std::span<const ObjectiveVector> points, std::span<const double> ref);
/// Monte Carlo estimate in any dimension, sampling the box spanned by the
/// componentwise minimum of the contributing points and `ref`.
HypervolumeResult hypervolume_monte_carlo(std::span<const ObjectiveVector> points, std::span<const double> ref,
                                          const MonteCarloOptions& mc);

/// Default progress reference point: componentwise maximum over `points`
/// pushed outward by 10% of its magnitude (10% of the spread, or 1, when the
/// maximum is zero).
ObjectiveVector default_reference_point(std::span<const ObjectiveVector> points);

}  // namespace paretoscope
