#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "paretoscope/random.hpp"

namespace paretoscope {

struct ForestParams {
  std::uint32_t tree_count = 100;
  std::uint32_t min_leaf = 2;
  double feature_fraction = 1.0 / 3.0;   // of the feature count, rounded up, at least one
  bool bootstrap = true;
  std::optional<std::uint32_t> max_depth;  // unlimited when empty

  /// Throws Error(invalid_input) on out-of-range values.
  void validate() const;
  std::size_t features_per_split(std::size_t dimension) const;
};

/// Binary CART regression tree stored as a flat node array; node 0 is the root.
class RegressionTree {
 public:
  struct Node {
    // Internal nodes: feature/threshold/left/right. Leaves: left == right == -1.
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;          // mean of the training targets reaching the node
    std::uint32_t count = 0;     // training samples reaching the node

    bool is_leaf() const noexcept { return left < 0; }
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<Node> nodes_;
};

struct Prediction {
  double mean = 0.0;
  double spread = 0.0;  // population standard deviation across trees
};

class Forest {
 public:
  Forest(std::vector<RegressionTree> trees, ForestParams params, std::size_t dimension);

  /// Throws Error(invalid_input) on a dimension mismatch.
  Prediction predict(std::span<const double> x) const;

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  const ForestParams& params() const noexcept { return params_; }
  std::size_t dimension() const noexcept { return dimension_; }

 private:
  std::vector<RegressionTree> trees_;
  ForestParams params_;
  std::size_t dimension_;
};

/// Fits one forest. Tree `t` draws from `rng.split(t)`, so the result does not
/// depend on `threads`. Throws Error(invalid_input) for empty data, ragged or
/// mismatched dimensions, and non-finite values.
Forest fit_forest(const std::vector<std::vector<double>>& X, std::span<const double> y, const ForestParams& params,
                  const RandomStream& rng, unsigned threads = 1);

/// Versioned JSON document with trees as nested node objects.
nlohmann::json to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& doc);

}  // namespace paretoscope
