#include "paretoscope/explorer.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

#include "paretoscope/error.hpp"

namespace paretoscope {

// ---------------------------------------------------------------------------
// Config

std::uint64_t ExplorationConfig::effective_random_budget() const {
  if (random_budget) return *random_budget;
  return std::max<std::uint64_t>(1, total_budget / 3);
}

void ExplorationConfig::validate() const {
  if (total_budget < 1) throw invalid_input("exploration: total_budget must be at least 1");
  const auto rb = effective_random_budget();
  if (rb < 1 || rb > total_budget) throw invalid_input("exploration: random_budget must lie in [1, total_budget]");
  if (batch_size < 1) throw invalid_input("exploration: batch_size must be at least 1");
  if (candidate_pool < batch_size) throw invalid_input("exploration: candidate_pool must be >= batch_size");
  if (!(kappa >= 0.0)) throw invalid_input("exploration: kappa must be nonnegative");
  if (parallelism < 1) throw invalid_input("exploration: parallelism must be at least 1");
  forest.validate();
}

ExplorationConfig parse_exploration_config(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw invalid_input("exploration config must be a JSON object");
  static const std::set<std::string> kKeys = {"total_budget",    "random_budget", "batch_size",   "candidate_pool",
                                              "kappa",           "seed",          "parallelism",  "reference_point",
                                              "forest",          "max_resample",  "enumeration_limit",
                                              "trace_samples"};
  for (const auto& [k, _] : doc.items())
    if (!kKeys.count(k)) throw invalid_input("exploration config: unknown field '" + k + "'");
  try {
    ExplorationConfig c;
    c.total_budget = doc.value("total_budget", c.total_budget);
    if (doc.contains("random_budget") && !doc.at("random_budget").is_null())
      c.random_budget = doc.at("random_budget").get<std::uint64_t>();
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.candidate_pool = doc.value("candidate_pool", c.candidate_pool);
    c.kappa = doc.value("kappa", c.kappa);
    c.seed = doc.value("seed", c.seed);
    c.parallelism = doc.value("parallelism", c.parallelism);
    if (doc.contains("reference_point") && !doc.at("reference_point").is_null())
      c.reference_point = doc.at("reference_point").get<std::vector<double>>();
    c.max_resample = doc.value("max_resample", c.max_resample);
    c.enumeration_limit = doc.value("enumeration_limit", c.enumeration_limit);
    c.trace_samples = doc.value("trace_samples", c.trace_samples);
    if (doc.contains("forest")) {
      const auto& f = doc.at("forest");
      c.forest.tree_count = f.value("tree_count", c.forest.tree_count);
      c.forest.min_leaf = f.value("min_leaf", c.forest.min_leaf);
      c.forest.feature_fraction = f.value("feature_fraction", c.forest.feature_fraction);
      c.forest.bootstrap = f.value("bootstrap", c.forest.bootstrap);
      if (f.contains("max_depth") && !f.at("max_depth").is_null())
        c.forest.max_depth = f.at("max_depth").get<std::uint32_t>();
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input(std::string("malformed exploration config: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const ExplorationConfig& c) {
  nlohmann::ordered_json j;
  j["total_budget"] = c.total_budget;
  j["random_budget"] = c.effective_random_budget();
  j["batch_size"] = c.batch_size;
  j["candidate_pool"] = c.candidate_pool;
  j["kappa"] = c.kappa;
  j["seed"] = c.seed;
  j["parallelism"] = c.parallelism;
  j["reference_point"] = c.reference_point ? nlohmann::ordered_json(*c.reference_point) : nlohmann::ordered_json();
  j["forest"] = {{"tree_count", c.forest.tree_count},
                 {"min_leaf", c.forest.min_leaf},
                 {"feature_fraction", c.forest.feature_fraction},
                 {"bootstrap", c.forest.bootstrap},
                 {"max_depth", c.forest.max_depth ? nlohmann::ordered_json(*c.forest.max_depth) : nlohmann::ordered_json()}};
  j["max_resample"] = c.max_resample;
  j["enumeration_limit"] = c.enumeration_limit;
  j["trace_samples"] = c.trace_samples;
  return j;
}

// ---------------------------------------------------------------------------
// Acquisition

double hypervolume_contribution(std::span<const double> point, std::span<const ObjectiveVector> front,
                                std::span<const double> ref, const MonteCarloOptions& mc) {
  for (std::size_t i = 0; i < ref.size(); ++i)
    if (!(point[i] < ref[i])) return 0.0;
  if (ref.size() <= 3) {
    std::vector<ObjectiveVector> with(front.begin(), front.end());
    const double before = hypervolume(with, ref).value;
    with.emplace_back(point.begin(), point.end());
    return std::max(0.0, hypervolume(with, ref).value - before);
  }
  // Share of the box [point, ref] that no front member already covers.
  RandomStream rng(mc.seed);
  const std::size_t d = ref.size();
  double box = 1.0;
  for (std::size_t i = 0; i < d; ++i) box *= ref[i] - point[i];
  std::vector<double> z(d);
  std::uint64_t fresh = 0;
  for (std::uint64_t s = 0; s < mc.samples; ++s) {
    for (std::size_t i = 0; i < d; ++i) z[i] = point[i] + rng.uniform01() * (ref[i] - point[i]);
    bool covered = false;
    for (const auto& f : front) {
      bool c = true;
      for (std::size_t i = 0; i < d && c; ++i) c = f[i] <= z[i];
      if (c) {
        covered = true;
        break;
      }
    }
    if (!covered) ++fresh;
  }
  return mc.samples ? box * static_cast<double>(fresh) / static_cast<double>(mc.samples) : 0.0;
}

std::vector<std::size_t> select_batch(std::span<const Candidate> candidates, std::span<const ObjectiveVector> front,
                                      std::span<const double> ref, std::size_t count) {
  std::vector<std::size_t> survivors, rest;
  std::vector<double> contribution(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& opt = candidates[i].optimistic;
    const bool dominated = std::any_of(front.begin(), front.end(), [&](const auto& f) { return dominates(f, opt); });
    if (dominated) {
      rest.push_back(i);
    } else {
      survivors.push_back(i);
      contribution[i] = hypervolume_contribution(opt, front, ref);
    }
  }
  auto better = [&](std::size_t a, std::size_t b) {
    if (contribution[a] != contribution[b]) return contribution[a] > contribution[b];
    if (candidates[a].total_spread != candidates[b].total_spread)
      return candidates[a].total_spread > candidates[b].total_spread;
    return candidates[a].features < candidates[b].features;
  };
  // Greedy batch: each pick joins the working front as its optimistic vector
  // before the next pick is scored. Contributions only shrink as the front
  // grows, so a stale score is an upper bound and is refreshed only when it
  // reaches the top.
  std::vector<ObjectiveVector> working(front.begin(), front.end());
  std::vector<std::size_t> scored_round(candidates.size(), 0);
  std::size_t round = 0;
  std::vector<std::size_t> chosen;
  while (chosen.size() < count && !survivors.empty()) {
    const auto best = std::min_element(survivors.begin(), survivors.end(), better);
    if (scored_round[*best] != round) {
      contribution[*best] = hypervolume_contribution(candidates[*best].optimistic, working, ref);
      scored_round[*best] = round;
      continue;
    }
    chosen.push_back(*best);
    working.push_back(candidates[*best].optimistic);
    survivors.erase(best);
    ++round;
  }
  if (chosen.size() < count) {
    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      if (candidates[a].total_spread != candidates[b].total_spread)
        return candidates[a].total_spread > candidates[b].total_spread;
      return candidates[a].features < candidates[b].features;
    });
    for (std::size_t i = 0; i < rest.size() && chosen.size() < count; ++i) chosen.push_back(rest[i]);
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Engine

namespace {

/// Hypervolume progress against a fixed reference. From four objectives up
/// the estimate reuses one fixed sample set, so it cannot decrease.
class ProgressTracker {
 public:
  ProgressTracker(ObjectiveVector ref, std::span<const ObjectiveVector> initial, std::uint64_t samples,
                  const RandomStream& rng)
      : ref_(std::move(ref)) {
    const std::size_t d = ref_.size();
    if (d <= 3) return;
    std::vector<double> lo(ref_);
    for (const auto& p : initial)
      for (std::size_t i = 0; i < d; ++i) lo[i] = std::min(lo[i], p[i]);
    box_ = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] -= ref_[i] - lo[i];  // room below the initial points for later improvements
      if (lo[i] == ref_[i]) lo[i] -= 1.0;
      box_ *= ref_[i] - lo[i];
    }
    RandomStream r = rng;
    samples_.resize(samples, std::vector<double>(d));
    for (auto& s : samples_)
      for (std::size_t i = 0; i < d; ++i) s[i] = lo[i] + r.uniform01() * (ref_[i] - lo[i]);
    covered_.assign(samples, false);
  }

  const ObjectiveVector& reference() const { return ref_; }

  double measure(std::span<const ObjectiveVector> front) {
    if (ref_.size() <= 3) return hypervolume(front, ref_).value;
    std::uint64_t hits = 0;
    for (std::size_t s = 0; s < samples_.size(); ++s) {
      if (!covered_[s]) {
        for (const auto& f : front) {
          bool c = true;
          for (std::size_t i = 0; i < ref_.size() && c; ++i) c = f[i] <= samples_[s][i];
          if (c) {
            covered_[s] = true;
            break;
          }
        }
      }
      hits += covered_[s];
    }
    return samples_.empty() ? 0.0 : box_ * static_cast<double>(hits) / static_cast<double>(samples_.size());
  }

 private:
  ObjectiveVector ref_;
  double box_ = 0.0;
  std::vector<std::vector<double>> samples_;
  std::vector<bool> covered_;  // monotone: front members are never lost, only dominated
};

class Engine {
 public:
  Engine(const ParameterSpace& space, const EvaluatorSpec& spec, const ExplorationConfig& cfg, const ExploreHooks& hooks)
      : space_(space), spec_(spec), cfg_(cfg), hooks_(hooks), root_(cfg.seed) {
    const Cardinality card = space_.cardinality();
    budget_ = cfg_.total_budget;
    if (!card.overflow) budget_ = std::min(budget_, card.count);
    enumerable_ = !card.overflow && card.count <= cfg_.enumeration_limit;
  }

  RunState run() {
    random_phase();
    std::uint64_t batch = 1;
    while (taken_.size() < budget_) {
      if (!active_batch(batch++)) break;
    }
    state_.space_exhausted = !space_.cardinality().overflow && taken_.size() >= space_.cardinality().count;
    return std::move(state_);
  }

 private:
  void random_phase() {
    RandomStream rng = root_.derive("random-phase");
    const std::uint64_t n = std::min(cfg_.effective_random_budget(), budget_);
    std::vector<IndexVector> batch;
    for (std::uint64_t i = 0; i < n; ++i) {
      if (auto p = draw_unique(rng)) batch.push_back(std::move(*p));
    }
    run_batch(batch);

    std::vector<ObjectiveVector> feasible;
    for (const auto& e : state_.evaluations)
      if (e.ok()) feasible.push_back(e.objective_vector());
    if (feasible.empty()) {
      std::string msg = "all " + std::to_string(state_.evaluations.size()) + " random-phase evaluations failed";
      if (!state_.evaluations.empty() && !state_.evaluations.front().note.empty())
        msg += " (first failure: " + state_.evaluations.front().note + ")";
      throw Error(ErrorKind::runtime, msg);
    }
    ObjectiveVector ref = cfg_.reference_point ? *cfg_.reference_point : default_reference_point(feasible);
    if (ref.size() != spec_.objectives.size())
      throw invalid_input("reference point has " + std::to_string(ref.size()) + " components, run declares " +
                          std::to_string(spec_.objectives.size()) + " objectives");
    state_.reference = ref;
    tracker_.emplace(ref, feasible, cfg_.trace_samples, root_.derive("trace"));
    record_progress(0);
  }

  /// Returns false when no unevaluated candidate is left.
  bool active_batch(std::uint64_t batch) {
    fit_forests(batch);
    std::vector<IndexVector> pool = candidate_pool(batch);
    if (pool.empty()) return false;

    std::vector<Candidate> candidates;
    candidates.reserve(pool.size());
    for (auto& idx : pool) {
      Candidate c;
      c.features = space_.encode_indices(idx);
      for (const auto& forest : state_.forests) {
        const Prediction p = forest.predict(c.features);
        c.optimistic.push_back(p.mean - cfg_.kappa * p.spread);
        c.total_spread += p.spread;
      }
      c.indices = std::move(idx);
      candidates.push_back(std::move(c));
    }

    std::vector<ObjectiveVector> front;
    for (const auto& m : state_.front.members) front.push_back(m.objectives);
    const std::size_t count = std::min<std::uint64_t>(cfg_.batch_size, budget_ - taken_.size());
    std::vector<IndexVector> chosen;
    for (std::size_t i : select_batch(candidates, front, state_.reference, count)) {
      taken_.insert(candidates[i].indices);
      chosen.push_back(candidates[i].indices);
    }
    if (chosen.empty()) return false;
    run_batch(chosen);
    record_progress(batch);
    return true;
  }

  void fit_forests(std::uint64_t batch) {
    std::vector<std::vector<double>> X;
    std::vector<std::vector<double>> ys(spec_.objectives.size());
    for (const auto& e : state_.evaluations) {
      if (!e.ok()) continue;
      X.push_back(space_.encode(e.point));
      for (std::size_t j = 0; j < ys.size(); ++j) ys[j].push_back(e.objectives[j].second);
    }
    state_.forests.clear();
    const RandomStream base = root_.derive("forest").split(batch);
    for (std::size_t j = 0; j < ys.size(); ++j)
      state_.forests.push_back(fit_forest(X, ys[j], cfg_.forest, base.split(j), cfg_.parallelism));
  }

  std::vector<IndexVector> candidate_pool(std::uint64_t batch) {
    RandomStream rng = root_.derive("pool").split(batch);
    std::vector<IndexVector> pool;
    std::set<IndexVector> seen;
    auto offer = [&](IndexVector idx) {
      if (taken_.count(idx) || !seen.insert(idx).second) return;
      pool.push_back(std::move(idx));
    };
    for (std::uint32_t i = 0; i < cfg_.candidate_pool; ++i) offer(space_.sample_indices(rng));
    for (const auto& m : state_.front.members)
      for (auto& n : space_.neighbor_indices(space_.indices_of(m.point))) offer(std::move(n));
    const std::size_t wanted = std::min<std::uint64_t>(cfg_.batch_size, budget_ - taken_.size());
    if (pool.size() < wanted && enumerable_)
      for (auto& idx : space_.enumerate()) offer(std::move(idx));
    return pool;
  }

  std::optional<IndexVector> draw_unique(RandomStream& rng) {
    for (std::uint32_t attempt = 0; attempt <= cfg_.max_resample; ++attempt) {
      IndexVector idx = space_.sample_indices(rng);
      if (taken_.insert(idx).second) return idx;
    }
    if (!enumerable_) return std::nullopt;
    std::vector<IndexVector> free;
    for (auto& idx : space_.enumerate())
      if (!taken_.count(idx)) free.push_back(std::move(idx));
    if (free.empty()) return std::nullopt;
    IndexVector idx = free[rng.uniform_index(free.size())];
    taken_.insert(idx);
    return idx;
  }

  void run_batch(const std::vector<IndexVector>& batch) {
    std::vector<ConfigPoint> points;
    for (const auto& idx : batch) points.push_back(space_.point_at(idx));
    std::vector<Evaluation> results(points.size());
    std::vector<std::exception_ptr> errors(points.size());

    auto work = [&](std::size_t i) {
      try {
        results[i] = evaluate(spec_, points[i], &space_);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    };
    const std::size_t workers = std::min<std::size_t>(cfg_.parallelism, points.size());
    if (workers <= 1) {
      for (std::size_t i = 0; i < points.size(); ++i) work(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < points.size();) work(i);
        });
    }
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);

    // Single writer: sequence indices follow submission order.
    for (auto& e : results) {
      e.sequence_index = state_.evaluations.size();
      if (hooks_.on_evaluation) hooks_.on_evaluation(e);
      state_.evaluations.push_back(std::move(e));
    }
    update_front();
  }

  void update_front() {
    std::vector<FrontMember> feasible;
    for (const auto& e : state_.evaluations)
      if (e.ok()) feasible.push_back({e.point, e.objective_vector()});
    state_.front = pareto_front(feasible, spec_.objective_names());
  }

  void record_progress(std::uint64_t batch) {
    std::vector<ObjectiveVector> front;
    for (const auto& m : state_.front.members) front.push_back(m.objectives);
    double hv = tracker_->measure(front);
    if (!state_.hv_trace.empty()) hv = std::max(hv, state_.hv_trace.back());
    state_.hv_trace.push_back(hv);
    if (hooks_.on_progress)
      hooks_.on_progress(ProgressRecord{batch, state_.evaluations.size(), hv, state_.reference});
  }

  const ParameterSpace& space_;
  const EvaluatorSpec& spec_;
  const ExplorationConfig& cfg_;
  const ExploreHooks& hooks_;
  RandomStream root_;
  std::uint64_t budget_ = 0;
  bool enumerable_ = false;
  std::set<IndexVector> taken_;
  std::optional<ProgressTracker> tracker_;
  RunState state_;
};

}  // namespace

RunState explore(const ParameterSpace& space, const EvaluatorSpec& spec, const ExplorationConfig& cfg,
                 const ExploreHooks& hooks) {
  cfg.validate();
  spec.validate();
  return Engine(space, spec, cfg, hooks).run();
}

}  // namespace paretoscope
