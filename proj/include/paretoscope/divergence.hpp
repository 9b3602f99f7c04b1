#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paretoscope/image_io.hpp"

namespace paretoscope {

inline constexpr std::size_t kIntensityBins = 256;
inline constexpr double kHistogramSmoothing = 1e-10;

/// Discrete distribution over bins. Frame histograms keep raw counts and
/// smoothed, renormalised probabilities (every bin strictly positive).
struct Histogram {
  std::vector<std::uint64_t> counts;
  std::vector<double> probabilities;

  std::size_t bin_count() const noexcept { return probabilities.size(); }

  /// Normalises `weights` as given, without smoothing.
  static Histogram from_weights(std::span<const double> weights);
  /// Adds `epsilon` to every bin and renormalises.
  static Histogram from_counts(std::span<const std::uint64_t> counts, double epsilon = kHistogramSmoothing);
};

/// Kullback-Leibler divergence D(p || q) = sum p_i ln(p_i / q_i), in nats.
/// Throws Error(invalid_input) on a bin-count mismatch or when q_i = 0 < p_i.
double kl_divergence(const Histogram& p, const Histogram& q);

/// 256-bin intensity histogram with additive smoothing.
Histogram frame_histogram(const GrayImage& image);

struct ComplexityScore {
  double max = 0.0;       // nats
  double mean = 0.0;      // nats
  double variance = 0.0;  // nats^2, population variance
};

struct SequenceComplexity {
  ComplexityScore score;
  std::vector<double> divergences;  // d_t = D(hist_t || hist_{t+1})
};

/// Frame-by-frame divergence statistics. Throws Error(invalid_input) for
/// fewer than two frames.
SequenceComplexity sequence_complexity(std::span<const GrayImage> frames, unsigned threads = 1);

}  // namespace paretoscope
