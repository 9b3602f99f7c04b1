#include "paretoscope/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "paretoscope/error.hpp"

namespace paretoscope {

namespace {

double quat_norm(const Quaternion& q) { return std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]); }

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

Trajectory::Trajectory(std::vector<Pose> poses) : poses_(std::move(poses)) {
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    if (!std::isfinite(poses_[i].timestamp)) throw invalid_input("trajectory: non-finite timestamp");
    if (i > 0 && !(poses_[i].timestamp > poses_[i - 1].timestamp))
      throw invalid_input("trajectory: timestamps must be strictly increasing (sample " + std::to_string(i) + ")");
    if (std::abs(quat_norm(poses_[i].orientation) - 1.0) > 1e-6)
      throw invalid_input("trajectory: quaternion of sample " + std::to_string(i) + " is not unit-norm");
  }
}

Trajectory Trajectory::translated(const Vec3& offset) const {
  auto poses = poses_;
  for (auto& p : poses)
    for (std::size_t k = 0; k < 3; ++k) p.position[k] += offset[k];
  return Trajectory(std::move(poses));
}

Trajectory parse_tum(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::vector<Pose> poses;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Pose p;
    auto& q = p.orientation;
    if (!(ls >> p.timestamp >> p.position[0] >> p.position[1] >> p.position[2] >> q[0] >> q[1] >> q[2] >> q[3]))
      throw invalid_input(source + ":" + std::to_string(lineno) + ": expected 'timestamp tx ty tz qx qy qz qw'");
    const double n = quat_norm(q);
    if (!(std::abs(n - 1.0) <= 1e-3))
      throw invalid_input(source + ":" + std::to_string(lineno) + ": quaternion is not unit-norm");
    for (auto& c : q) c /= n;
    poses.push_back(p);
  }
  try {
    return Trajectory(std::move(poses));
  } catch (const Error& e) {
    throw invalid_input(source + ": " + e.what());
  }
}

Trajectory read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot read trajectory " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tum(ss.str(), path.string());
}

void write_tum(const std::filesystem::path& path, const Trajectory& trajectory) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot write trajectory " + path.string());
  out << "# timestamp tx ty tz qx qy qz qw\n" << std::setprecision(17);
  for (const auto& p : trajectory.poses()) {
    out << p.timestamp;
    for (double v : p.position) out << ' ' << v;
    for (double v : p.orientation) out << ' ' << v;
    out << '\n';
  }
}

Association associate(const Trajectory& a, const Trajectory& b, double tol) {
  if (!(tol > 0.0)) throw invalid_input("association tolerance must be positive");
  const auto& pa = a.poses();
  const auto& pb = b.poses();
  std::vector<bool> used(pb.size(), false);
  Association out;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double t = pa[i].timestamp;
    const auto it = std::lower_bound(pb.begin(), pb.end(), t, [](const Pose& p, double v) { return p.timestamp < v; });
    const auto pos = static_cast<std::size_t>(it - pb.begin());
    // Nearest unused neighbour on each side; earlier sample wins ties.
    std::optional<std::size_t> best;
    std::size_t l = pos;
    while (l > 0 && used[l - 1]) --l;
    if (l > 0) best = l - 1;
    std::size_t r = pos;
    while (r < pb.size() && used[r]) ++r;
    if (r < pb.size() && (!best || std::abs(pb[r].timestamp - t) < std::abs(pb[*best].timestamp - t))) best = r;
    if (best && std::abs(pb[*best].timestamp - t) <= tol) {
      used[*best] = true;
      out.pairs.emplace_back(i, *best);
    } else {
      ++out.unmatched_a;
    }
  }
  out.unmatched_b = pb.size() - out.pairs.size();
  return out;
}

ErrorDistribution error_distribution(std::vector<double> errors) {
  ErrorDistribution d;
  d.errors = std::move(errors);
  if (d.errors.empty()) return d;
  double sum = 0.0, sq = 0.0;
  for (double e : d.errors) {
    sum += e;
    sq += e * e;
    d.max = std::max(d.max, e);
  }
  const double n = static_cast<double>(d.errors.size());
  d.mean = sum / n;
  d.rmse = std::sqrt(sq / n);
  std::vector<double> sorted = d.errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size() / 2;
  d.median = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  return d;
}

ErrorDistribution ate(const Trajectory& estimate, const Trajectory& ground_truth, const AteOptions& options) {
  const Association assoc = associate(estimate, ground_truth, options.tol);
  if (assoc.pairs.empty()) throw invalid_input("ate: no estimate sample associates with the ground truth");
  const auto& est = estimate.poses();
  const auto& gt = ground_truth.poses();

  Vec3 offset{0.0, 0.0, 0.0};
  if (options.align == Alignment::first_pose) {
    const auto [i0, j0] = assoc.pairs.front();
    for (std::size_t k = 0; k < 3; ++k) offset[k] = gt[j0].position[k] - est[i0].position[k];
  }
  std::vector<double> errors;
  std::vector<double> stamps;
  errors.reserve(assoc.pairs.size());
  for (const auto& [i, j] : assoc.pairs) {
    Vec3 p = est[i].position;
    for (std::size_t k = 0; k < 3; ++k) p[k] += offset[k];
    errors.push_back(distance(p, gt[j].position));
    stamps.push_back(est[i].timestamp);
  }
  ErrorDistribution d = error_distribution(std::move(errors));
  d.timestamps = std::move(stamps);
  d.unmatched = assoc.unmatched_a;
  return d;
}

ErrorHistogram error_histogram(const ErrorDistribution& dist, std::size_t bin_count,
                               std::optional<std::pair<double, double>> range) {
  if (bin_count == 0) throw invalid_input("error_histogram: bin_count must be at least 1");
  ErrorHistogram h;
  if (range) {
    h.lo = range->first;
    h.hi = range->second;
  } else {
    h.lo = 0.0;
    h.hi = dist.errors.empty() ? 0.0 : *std::max_element(dist.errors.begin(), dist.errors.end());
  }
  if (!(h.hi >= h.lo)) throw invalid_input("error_histogram: range upper bound below lower bound");
  h.counts.assign(bin_count, 0);
  h.mean = dist.mean;
  const double width = h.bin_width();
  for (double e : dist.errors) {
    std::size_t bin = 0;
    if (width > 0.0) {
      const double pos = (std::clamp(e, h.lo, h.hi) - h.lo) / width;
      bin = std::min(bin_count - 1, static_cast<std::size_t>(pos));
    }
    ++h.counts[bin];
  }
  return h;
}

}  // namespace paretoscope
