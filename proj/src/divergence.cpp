#include "paretoscope/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "paretoscope/error.hpp"

namespace paretoscope {

Histogram Histogram::from_weights(std::span<const double> weights) {
  if (weights.empty()) throw invalid_input("histogram needs at least one bin");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw invalid_input("histogram weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw invalid_input("histogram weights sum to zero");
  Histogram h;
  h.probabilities.reserve(weights.size());
  for (double w : weights) h.probabilities.push_back(w / total);
  return h;
}

Histogram Histogram::from_counts(std::span<const std::uint64_t> counts, double epsilon) {
  if (counts.empty()) throw invalid_input("histogram needs at least one bin");
  Histogram h;
  h.counts.assign(counts.begin(), counts.end());
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c) + epsilon;
  if (!(total > 0.0)) throw invalid_input("histogram has no mass");
  h.probabilities.reserve(counts.size());
  for (auto c : counts) h.probabilities.push_back((static_cast<double>(c) + epsilon) / total);
  return h;
}

double kl_divergence(const Histogram& p, const Histogram& q) {
  if (p.bin_count() != q.bin_count())
    throw invalid_input("kl_divergence: bin count mismatch (" + std::to_string(p.bin_count()) + " vs " +
                        std::to_string(q.bin_count()) + ")");
  double d = 0.0;
  for (std::size_t i = 0; i < p.bin_count(); ++i) {
    const double pi = p.probabilities[i];
    const double qi = q.probabilities[i];
    if (pi == 0.0) continue;
    if (qi == 0.0) throw invalid_input("kl_divergence: q has zero mass where p does not (histogram not smoothed)");
    d += pi * std::log(pi / qi);
  }
  // Rounding can leave tiny negatives for p == q.
  return std::max(0.0, d);
}

Histogram frame_histogram(const GrayImage& image) {
  if (image.empty()) throw invalid_input("frame_histogram: empty image");
  std::vector<std::uint64_t> counts(kIntensityBins, 0);
  for (auto px : image.pixels) ++counts[px];
  return Histogram::from_counts(counts);
}

SequenceComplexity sequence_complexity(std::span<const GrayImage> frames, unsigned threads) {
  if (frames.size() < 2) throw invalid_input("sequence_complexity needs at least two frames");
  std::vector<Histogram> hists(frames.size());
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(frames.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < frames.size(); ++i) hists[i] = frame_histogram(frames[i]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < frames.size(); i += threads) hists[i] = frame_histogram(frames[i]);
      });
  }

  SequenceComplexity out;
  out.divergences.reserve(frames.size() - 1);
  for (std::size_t t = 0; t + 1 < frames.size(); ++t) out.divergences.push_back(kl_divergence(hists[t], hists[t + 1]));

  const double n = static_cast<double>(out.divergences.size());
  double sum = 0.0;
  double mx = 0.0;
  for (double d : out.divergences) {
    sum += d;
    mx = std::max(mx, d);
  }
  const double mean = sum / n;
  double var = 0.0;
  for (double d : out.divergences) var += (d - mean) * (d - mean);
  out.score = {mx, mean, var / n};
  return out;
}

}  // namespace paretoscope
