#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "paretoscope/evaluator.hpp"
#include "paretoscope/forest.hpp"
#include "paretoscope/pareto.hpp"
#include "paretoscope/run_log.hpp"
#include "paretoscope/space.hpp"

namespace paretoscope {

struct ExplorationConfig {
  std::uint64_t total_budget = 100;
  std::optional<std::uint64_t> random_budget;  // defaults to total_budget / 3 (at least 1)
  std::uint32_t batch_size = 8;
  std::uint32_t candidate_pool = 1000;
  double kappa = 1.0;                          // optimism: mean - kappa * spread
  std::uint64_t seed = 0;
  std::uint32_t parallelism = 1;
  std::optional<ObjectiveVector> reference_point;  // defaults from the random phase
  ForestParams forest;
  std::uint32_t max_resample = 64;             // uniform redraws on collision before enumerating
  std::uint64_t enumeration_limit = 1u << 20;  // spaces at most this large may be enumerated
  std::uint64_t trace_samples = 200'000;       // Monte Carlo samples for 4+ objectives

  std::uint64_t effective_random_budget() const;
  /// Throws Error(invalid_input) on violated invariants.
  void validate() const;
};

ExplorationConfig parse_exploration_config(const nlohmann::ordered_json& doc);
nlohmann::ordered_json to_json(const ExplorationConfig& cfg);

struct RunState {
  std::vector<Evaluation> evaluations;  // sequence order
  ParetoFront front;                    // over feasible evaluations
  std::vector<Forest> forests;          // one per objective; empty before the first fit
  ObjectiveVector reference;
  std::vector<double> hv_trace;         // after the random phase, then after every batch
  bool space_exhausted = false;
};

struct ExploreHooks {
  std::function<void(const Evaluation&)> on_evaluation;
  std::function<void(const ProgressRecord&)> on_progress;
};

/// One active-learning candidate, already scored by the surrogates.
struct Candidate {
  IndexVector indices;
  std::vector<double> features;  // encoded point; also the tie-break order
  ObjectiveVector optimistic;    // per objective: mean - kappa * spread
  double total_spread = 0.0;
};

/// Hypervolume gained by adding `point` to `front` (exact up to three
/// objectives, Monte Carlo inside the box [point, ref] above that).
double hypervolume_contribution(std::span<const double> point, std::span<const ObjectiveVector> front,
                                std::span<const double> ref, const MonteCarloOptions& mc = {20'000, 0x5eed});

/// Picks up to `count` candidates among those whose optimistic vector no
/// front member dominates. Picks are greedy: each maximizes hypervolume
/// contribution against the front plus the optimistic vectors already picked
/// (ties: larger total spread, then lower encoded point). Shortfalls are
/// filled with the highest-spread remaining candidates. Returns indices into
/// `candidates` in pick order.
std::vector<std::size_t> select_batch(std::span<const Candidate> candidates, std::span<const ObjectiveVector> front,
                                      std::span<const double> ref, std::size_t count);

/// Random phase followed by forest-guided active learning until the budget
/// (or the space) is exhausted. Throws Error(spawn_failure) if the evaluator
/// cannot be started and Error(runtime) if every random-phase evaluation
/// fails.
RunState explore(const ParameterSpace& space, const EvaluatorSpec& spec, const ExplorationConfig& cfg,
                 const ExploreHooks& hooks = {});

}  // namespace paretoscope
