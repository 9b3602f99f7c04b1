#include "paretoscope/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace paretoscope {

namespace {

std::size_t objective_index(const ParetoFront& front, const std::string& name) {
  const auto it = std::find(front.objective_names.begin(), front.objective_names.end(), name);
  if (it == front.objective_names.end()) throw invalid_input("unknown objective '" + name + "'");
  return static_cast<std::size_t>(it - front.objective_names.begin());
}

std::string describe(const ParetoFront& front, const FrontMember& m) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < m.point.assignment.size(); ++i)
    os << (i ? ", " : "") << m.point.assignment[i].name << "=" << to_string(m.point.assignment[i].value);
  os << "} -> (";
  for (std::size_t i = 0; i < m.objectives.size(); ++i)
    os << (i ? ", " : "") << (i < front.objective_names.size() ? front.objective_names[i] : "?") << "="
       << m.objectives[i];
  os << ")";
  return os.str();
}

}  // namespace

Selection select_config(const ParetoFront& front, const Constraints& constraints, const std::string& minimize,
                        const ParameterSpace* space) {
  const std::size_t target = objective_index(front, minimize);
  std::vector<std::pair<std::size_t, double>> bounds;
  for (const auto& [name, bound] : constraints) bounds.emplace_back(objective_index(front, name), bound);

  std::optional<std::size_t> best;
  auto better = [&](std::size_t a, std::size_t b) {
    const auto& ma = front.members[a];
    const auto& mb = front.members[b];
    if (ma.objectives[target] != mb.objectives[target]) return ma.objectives[target] < mb.objectives[target];
    if (space) return space->encode(ma.point) < space->encode(mb.point);
    return ma.point < mb.point;
  };
  for (std::size_t i = 0; i < front.members.size(); ++i) {
    const auto& obj = front.members[i].objectives;
    const bool feasible = std::all_of(bounds.begin(), bounds.end(), [&](const auto& b) { return obj[b.first] <= b.second; });
    if (feasible && (!best || better(i, *best))) best = i;
  }
  if (best) return {front.members[*best], *best};

  if (front.members.empty()) throw InfeasibleConstraints("infeasible constraints: the front is empty", FrontMember{});
  std::size_t nearest = 0;
  double nearest_violation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < front.members.size(); ++i) {
    double violation = 0.0;
    for (const auto& [j, bound] : bounds)
      violation += std::max(0.0, front.members[i].objectives[j] - bound) / std::max(std::abs(bound), 1e-12);
    if (violation < nearest_violation) {
      nearest_violation = violation;
      nearest = i;
    }
  }
  throw InfeasibleConstraints(
      "infeasible constraints: no front member satisfies every bound; nearest is " +
          describe(front, front.members[nearest]),
      front.members[nearest]);
}

void BucketTable::validate() const {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1])) throw invalid_input("bucket thresholds must be strictly increasing");
  if (fronts.size() != thresholds.size() + 1)
    throw invalid_input("bucket table needs one front per threshold plus a final bucket");
}

std::size_t bucket_for(const BucketTable& table, double mean_divergence) {
  table.validate();
  for (std::size_t i = 0; i < table.thresholds.size(); ++i)
    if (table.thresholds[i] >= mean_divergence) return i;
  return table.thresholds.size();
}

Selection ms_select(const ComplexityScore& score, const BucketTable& table, const Constraints& constraints,
                    const std::string& minimize, const ParameterSpace* space) {
  return select_config(table.fronts[bucket_for(table, score.mean)], constraints, minimize, space);
}

}  // namespace paretoscope
