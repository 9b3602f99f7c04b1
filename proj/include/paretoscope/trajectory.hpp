#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace paretoscope {

using Vec3 = std::array<double, 3>;

/// Unit quaternion stored as (x, y, z, w), the TUM column order.
using Quaternion = std::array<double, 4>;

struct Pose {
  double timestamp = 0.0;  // seconds
  Vec3 position{};         // metres
  Quaternion orientation{0.0, 0.0, 0.0, 1.0};
};

/// Time-ordered poses: strictly increasing timestamps, unit quaternions.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws Error(invalid_input) if timestamps are not strictly increasing or
  /// a quaternion is not unit-norm within 1e-6.
  explicit Trajectory(std::vector<Pose> poses);

  const std::vector<Pose>& poses() const noexcept { return poses_; }
  std::size_t size() const noexcept { return poses_.size(); }
  bool empty() const noexcept { return poses_.empty(); }

  /// Same poses with `offset` added to every position.
  Trajectory translated(const Vec3& offset) const;

 private:
  std::vector<Pose> poses_;
};

/// TUM RGB-D text format: `timestamp tx ty tz qx qy qz qw` per line, '#'
/// comments. Quaternions are renormalised when within 1e-3 of unit length
/// (the files carry a handful of digits); anything further off is rejected.
Trajectory read_tum(const std::filesystem::path& path);
Trajectory parse_tum(const std::string& text, const std::string& source = "<memory>");
void write_tum(const std::filesystem::path& path, const Trajectory& trajectory);

struct Association {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (index in a, index in b)
  std::size_t unmatched_a = 0;
  std::size_t unmatched_b = 0;
};

/// Greedy nearest-timestamp association in the time order of `a`; each
/// sample of `b` is used at most once. Throws Error(invalid_input) if tol <= 0.
Association associate(const Trajectory& a, const Trajectory& b, double tol);

enum class Alignment { none, first_pose };

struct AteOptions {
  Alignment align = Alignment::none;
  double tol = 0.02;  // seconds
};

struct ErrorDistribution {
  std::vector<double> errors;  // metres, one per associated pair
  std::vector<double> timestamps;  // estimate timestamps of the pairs
  double mean = 0.0;           // the reported ATE
  double rmse = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t unmatched = 0;   // estimate samples without a ground-truth partner
};

/// Per-pair Euclidean position error after optional translation alignment
/// on the first associated pair. Throws Error(invalid_input) when nothing
/// associates.
ErrorDistribution ate(const Trajectory& estimate, const Trajectory& ground_truth, const AteOptions& options = {});

/// Summary statistics of a bare error list (e.g. loaded from a CSV).
ErrorDistribution error_distribution(std::vector<double> errors);

struct ErrorHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
  double mean = 0.0;  // marker for the mean error

  double bin_width() const noexcept { return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size()); }
};

/// Half-open bins over [lo, hi), the last bin closed; errors outside the
/// range are clipped into the end bins. Without a range, [0, max error] is
/// used. Throws Error(invalid_input) for bin_count == 0 or hi < lo.
ErrorHistogram error_histogram(const ErrorDistribution& dist, std::size_t bin_count,
                               std::optional<std::pair<double, double>> range = std::nullopt);

}  // namespace paretoscope
