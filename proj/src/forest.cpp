#include "paretoscope/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "paretoscope/error.hpp"

namespace paretoscope {

namespace {

constexpr int kForestSchemaVersion = 1;

/// Column-major copy of the training set plus the sample subset of one tree.
struct TrainingView {
  std::size_t dimension = 0;
  std::vector<std::vector<double>> columns;  // columns[f][row]
  std::span<const double> y;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingView& data, const ForestParams& params, RandomStream rng)
      : data_(data), params_(params), rng_(std::move(rng)) {}

  RegressionTree build(std::vector<std::uint32_t> rows) {
    nodes_.clear();
    grow(rows, 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  std::int32_t grow(std::vector<std::uint32_t>& rows, std::uint32_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();

    double sum = 0.0;
    for (auto r : rows) sum += data_.y[r];
    const double n = static_cast<double>(rows.size());
    const double mean = sum / n;
    double sse = 0.0;
    for (auto r : rows) sse += (data_.y[r] - mean) * (data_.y[r] - mean);
    nodes_[id].value = mean;
    nodes_[id].count = static_cast<std::uint32_t>(rows.size());

    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf) || sse == 0.0 || depth_capped) return id;

    const Split split = best_split(rows, sum, sse);
    if (split.feature < 0) return id;

    std::vector<std::uint32_t> left, right;
    const auto& col = data_.columns[split.feature];
    for (auto r : rows) (col[r] <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t r = grow(right, depth + 1);
    nodes_[id].feature = split.feature;
    nodes_[id].threshold = split.threshold;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<std::size_t> draw_features() {
    const std::size_t d = data_.dimension;
    const std::size_t m = params_.features_per_split(d);
    std::vector<std::size_t> all(d);
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < m; ++i) std::swap(all[i], all[i + rng_.uniform_index(d - i)]);
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const std::vector<std::uint32_t>& rows, double total_sum, double sse) {
    Split best;
    const std::size_t n = rows.size();
    const std::size_t min_leaf = params_.min_leaf;
    const double base = total_sum * total_sum / static_cast<double>(n);
    // Floating-point noise must not count as an improvement.
    const double min_gain = 1e-12 * sse;

    std::vector<std::pair<double, double>> xy(n);
    for (std::size_t f : draw_features()) {
      const auto& col = data_.columns[f];
      for (std::size_t i = 0; i < n; ++i) xy[i] = {col[rows[i]], data_.y[rows[i]]};
      std::sort(xy.begin(), xy.end());
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += xy[i].second;
        const std::size_t nl = i + 1;
        if (xy[i].first == xy[i + 1].first) continue;
        if (nl < min_leaf || n - nl < min_leaf) continue;
        const double right_sum = total_sum - left_sum;
        // Variance reduction up to the constant parent term.
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(n - nl) - base;
        // Strict comparison: earlier (lower feature, lower threshold) wins ties.
        if (gain > min_gain && gain > best.gain) {
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = 0.5 * (xy[i].first + xy[i + 1].first);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const TrainingView& data_;
  const ForestParams& params_;
  RandomStream rng_;
  std::vector<RegressionTree::Node> nodes_;
};

void node_to_json(const std::vector<RegressionTree::Node>& nodes, std::int32_t id, nlohmann::json& out) {
  const auto& n = nodes[id];
  out["value"] = n.value;
  out["count"] = n.count;
  if (n.is_leaf()) return;
  out["feature"] = n.feature;
  out["threshold"] = n.threshold;
  node_to_json(nodes, n.left, out["left"]);
  node_to_json(nodes, n.right, out["right"]);
}

std::int32_t node_from_json(const nlohmann::json& j, std::size_t dimension, std::vector<RegressionTree::Node>& nodes) {
  const auto id = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  RegressionTree::Node node;
  node.value = j.at("value").get<double>();
  node.count = j.at("count").get<std::uint32_t>();
  if (j.contains("feature")) {
    node.feature = j.at("feature").get<std::int32_t>();
    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= dimension)
      throw invalid_input("forest document: split feature out of range");
    node.threshold = j.at("threshold").get<double>();
    node.left = node_from_json(j.at("left"), dimension, nodes);
    node.right = node_from_json(j.at("right"), dimension, nodes);
  }
  nodes[id] = node;
  return id;
}

}  // namespace

void ForestParams::validate() const {
  if (tree_count < 1) throw invalid_input("forest: tree_count must be positive");
  if (min_leaf < 1) throw invalid_input("forest: min_leaf must be positive");
  if (!(feature_fraction > 0.0 && feature_fraction <= 1.0))
    throw invalid_input("forest: feature_fraction must lie in (0, 1]");
  if (max_depth && *max_depth < 1) throw invalid_input("forest: max_depth must be positive");
}

std::size_t ForestParams::features_per_split(std::size_t dimension) const {
  const auto m = static_cast<std::size_t>(std::ceil(feature_fraction * static_cast<double>(dimension) - 1e-12));
  return std::clamp<std::size_t>(m, 1, dimension);
}

double RegressionTree::predict(std::span<const double> x) const {
  std::int32_t id = 0;
  while (!nodes_[id].is_leaf()) id = x[nodes_[id].feature] <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
  return nodes_[id].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[nodes_[i].left] = level[i] + 1;
      level[nodes_[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

Forest::Forest(std::vector<RegressionTree> trees, ForestParams params, std::size_t dimension)
    : trees_(std::move(trees)), params_(std::move(params)), dimension_(dimension) {
  if (trees_.empty()) throw invalid_input("forest must contain at least one tree");
}

Prediction Forest::predict(std::span<const double> x) const {
  if (x.size() != dimension_)
    throw invalid_input("forest expects " + std::to_string(dimension_) + " features, got " + std::to_string(x.size()));
  const double n = static_cast<double>(trees_.size());
  double sum = 0.0;
  std::vector<double> preds;
  preds.reserve(trees_.size());
  for (const auto& t : trees_) {
    preds.push_back(t.predict(x));
    sum += preds.back();
  }
  const double mean = sum / n;
  double var = 0.0;
  for (double p : preds) var += (p - mean) * (p - mean);
  return {mean, std::sqrt(var / n)};
}

Forest fit_forest(const std::vector<std::vector<double>>& X, std::span<const double> y, const ForestParams& params,
                  const RandomStream& rng, unsigned threads) {
  params.validate();
  if (X.empty()) throw invalid_input("forest: empty training data");
  if (X.size() != y.size())
    throw invalid_input("forest: " + std::to_string(X.size()) + " feature rows but " + std::to_string(y.size()) +
                        " targets");
  const std::size_t d = X.front().size();
  if (d == 0) throw invalid_input("forest: feature vectors must be nonempty");

  TrainingView data;
  data.dimension = d;
  data.y = y;
  data.columns.assign(d, std::vector<double>(X.size()));
  for (std::size_t r = 0; r < X.size(); ++r) {
    if (X[r].size() != d) throw invalid_input("forest: feature row " + std::to_string(r) + " has wrong dimension");
    if (!std::isfinite(y[r])) throw invalid_input("forest: non-finite target at row " + std::to_string(r));
    for (std::size_t f = 0; f < d; ++f) {
      if (!std::isfinite(X[r][f])) throw invalid_input("forest: non-finite feature at row " + std::to_string(r));
      data.columns[f][r] = X[r][f];
    }
  }

  const auto n = static_cast<std::uint32_t>(X.size());
  std::vector<RegressionTree> trees(params.tree_count);
  auto build_tree = [&](std::size_t t) {
    RandomStream tree_rng = rng.split(t);
    std::vector<std::uint32_t> rows(n);
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::uint32_t>(tree_rng.uniform_index(n));
    } else {
      std::iota(rows.begin(), rows.end(), 0u);
    }
    TreeBuilder builder(data, params, std::move(tree_rng));
    trees[t] = builder.build(std::move(rows));
  };

  threads = std::max(1u, std::min<unsigned>(threads, params.tree_count));
  if (threads == 1) {
    for (std::size_t t = 0; t < trees.size(); ++t) build_tree(t);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < trees.size(); t += threads) build_tree(t);
      });
  }
  return Forest(std::move(trees), params, d);
}

nlohmann::json to_json(const Forest& forest) {
  nlohmann::json doc;
  doc["schema"] = "paretoscope.forest";
  doc["version"] = kForestSchemaVersion;
  doc["dimension"] = forest.dimension();
  const auto& p = forest.params();
  doc["params"] = {{"tree_count", p.tree_count},
                   {"min_leaf", p.min_leaf},
                   {"feature_fraction", p.feature_fraction},
                   {"bootstrap", p.bootstrap},
                   {"max_depth", p.max_depth ? nlohmann::json(*p.max_depth) : nlohmann::json(nullptr)}};
  auto& trees = doc["trees"] = nlohmann::json::array();
  for (const auto& t : forest.trees()) {
    nlohmann::json root;
    node_to_json(t.nodes(), 0, root);
    trees.push_back(std::move(root));
  }
  return doc;
}

Forest forest_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema") != "paretoscope.forest") throw invalid_input("not a forest document");
    if (doc.at("version").get<int>() != kForestSchemaVersion)
      throw invalid_input("unsupported forest document version " + doc.at("version").dump());
    ForestParams p;
    const auto& jp = doc.at("params");
    p.tree_count = jp.at("tree_count").get<std::uint32_t>();
    p.min_leaf = jp.at("min_leaf").get<std::uint32_t>();
    p.feature_fraction = jp.at("feature_fraction").get<double>();
    p.bootstrap = jp.at("bootstrap").get<bool>();
    if (!jp.at("max_depth").is_null()) p.max_depth = jp.at("max_depth").get<std::uint32_t>();
    p.validate();
    const auto d = doc.at("dimension").get<std::size_t>();
    std::vector<RegressionTree> trees;
    for (const auto& jt : doc.at("trees")) {
      std::vector<RegressionTree::Node> nodes;
      node_from_json(jt, d, nodes);
      trees.emplace_back(std::move(nodes));
    }
    return Forest(std::move(trees), p, d);
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input(std::string("malformed forest document: ") + e.what());
  }
}

}  // namespace paretoscope
