#pragma once

#include <map>
#include <string>
#include <vector>

#include "paretoscope/divergence.hpp"
#include "paretoscope/error.hpp"
#include "paretoscope/pareto.hpp"
#include "paretoscope/space.hpp"

namespace paretoscope {

/// Upper bounds per objective, in the stored (minimization) orientation.
using Constraints = std::map<std::string, double>;

struct Selection {
  FrontMember member;
  std::size_t member_index = 0;  // position in the front
};

/// Raised when no front member satisfies every bound; carries the member
/// with the smallest total relative violation.
class InfeasibleConstraints : public Error {
 public:
  InfeasibleConstraints(const std::string& what, FrontMember nearest)
      : Error(ErrorKind::infeasible, what), nearest_(std::move(nearest)) {}
  const FrontMember& nearest() const noexcept { return nearest_; }

 private:
  FrontMember nearest_;
};

/// Among members meeting all bounds, the one minimizing `minimize`; ties go
/// to the lower encoded configuration (`space` supplies the encoding; without
/// it, configurations compare by value). Throws Error(invalid_input) for an
/// unknown objective and InfeasibleConstraints when nothing qualifies.
Selection select_config(const ParetoFront& front, const Constraints& constraints, const std::string& minimize,
                        const ParameterSpace* space = nullptr);

/// Fronts keyed by mean divergence: bucket k holds sequences whose mean is
/// at most thresholds[k] (and above thresholds[k-1]); the final bucket takes
/// everything above the last threshold.
struct BucketTable {
  std::vector<double> thresholds;   // strictly increasing
  std::vector<ParetoFront> fronts;  // thresholds.size() + 1 entries

  void validate() const;
};

std::size_t bucket_for(const BucketTable& table, double mean_divergence);

Selection ms_select(const ComplexityScore& score, const BucketTable& table, const Constraints& constraints,
                    const std::string& minimize, const ParameterSpace* space = nullptr);

}  // namespace paretoscope
