#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "paretoscope/error.hpp"
#include "paretoscope/explorer.hpp"

using namespace paretoscope;

namespace {

const std::string kStubs = PARETOSCOPE_STUB_DIR;

ParameterSpace grid(std::size_t dims, std::int64_t hi) {
  std::vector<ParameterDef> defs;
  for (std::size_t i = 0; i < dims; ++i) defs.emplace_back("x" + std::to_string(i + 1), IntRange{0, hi, 1});
  return ParameterSpace(std::move(defs));
}

EvaluatorSpec zdt1() { return EvaluatorSpec{BuiltinEvaluator{"zdt1"}, builtin_objectives("zdt1")}; }

ExplorationConfig small_config(std::uint64_t budget, std::uint64_t seed) {
  ExplorationConfig c;
  c.total_budget = budget;
  c.random_budget = std::max<std::uint64_t>(1, budget / 3);
  c.batch_size = 4;
  c.candidate_pool = 200;
  c.seed = seed;
  c.forest.tree_count = 20;
  return c;
}

/// Evaluations with the measured wall time cleared, for run-to-run comparison.
std::vector<Evaluation> without_timing(std::vector<Evaluation> evals) {
  for (auto& e : evals) e.wall_time = 0.0;
  return evals;
}

std::vector<std::size_t> brute_front_of(const std::vector<Evaluation>& evals) {
  std::vector<std::vector<double>> objs;
  for (const auto& e : evals) objs.push_back(e.objective_vector());
  return oracle::brute_force_front(objs);
}

}  // namespace

TEST_CASE("budget larger than a tiny space evaluates every point once") {
  SUBCASE("one parameter") {
    const auto space = grid(1, 9);
    const auto state = explore(space, zdt1(), small_config(30, 1));
    CHECK(state.space_exhausted);
    CHECK(state.evaluations.size() == 10);
    std::set<ConfigPoint> seen;
    for (const auto& e : state.evaluations) CHECK(seen.insert(e.point).second);
    CHECK(state.front.members.size() == brute_front_of(state.evaluations).size());
  }
  SUBCASE("two parameters") {
    const ParameterSpace space({ParameterDef("x1", IntRange{0, 4, 1}), ParameterDef("x2", IntRange{0, 1, 1})});
    const auto state = explore(space, zdt1(), small_config(30, 2));
    CHECK(state.evaluations.size() == 10);
    const auto idx = brute_front_of(state.evaluations);
    REQUIRE(state.front.members.size() == idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      CHECK(state.front.members[k].point == state.evaluations[idx[k]].point);
  }
}

TEST_CASE("explore spends exactly the budget without repeats") {
  const auto space = grid(3, 10);
  const auto cfg = small_config(40, 7);
  std::size_t hook_evals = 0, hook_progress = 0;
  ExploreHooks hooks{[&](const Evaluation&) { ++hook_evals; }, [&](const ProgressRecord&) { ++hook_progress; }};
  const auto state = explore(space, zdt1(), cfg, hooks);
  CHECK(state.evaluations.size() == 40);
  CHECK(hook_evals == 40);
  CHECK(hook_progress == state.hv_trace.size());
  std::set<ConfigPoint> seen;
  for (std::size_t i = 0; i < state.evaluations.size(); ++i) {
    CHECK(state.evaluations[i].sequence_index == i);
    CHECK(seen.insert(state.evaluations[i].point).second);
  }
  // One trace entry after the random phase, then one per batch.
  CHECK(state.hv_trace.size() == 1 + (40 - 13 + 3) / 4);
  for (std::size_t i = 1; i < state.hv_trace.size(); ++i) CHECK(state.hv_trace[i] >= state.hv_trace[i - 1]);
  CHECK(state.forests.size() == 2);
  CHECK(state.front.members.size() == brute_front_of(state.evaluations).size());
  const auto final_hv = hypervolume(state.front, state.reference).value;
  CHECK(state.hv_trace.back() == doctest::Approx(final_hv));
}

TEST_CASE("explore is deterministic for a seed, and parallelism does not change it") {
  const auto space = grid(3, 10);
  auto cfg = small_config(30, 99);
  const auto a = explore(space, zdt1(), cfg);
  const auto b = explore(space, zdt1(), cfg);
  cfg.parallelism = 4;
  const auto c = explore(space, zdt1(), cfg);
  CHECK(without_timing(a.evaluations) == without_timing(b.evaluations));
  CHECK(without_timing(a.evaluations) == without_timing(c.evaluations));
  CHECK(a.hv_trace == c.hv_trace);
  cfg.seed = 100;
  CHECK_FALSE(without_timing(explore(space, zdt1(), cfg).evaluations) == without_timing(a.evaluations));
}

TEST_CASE("failed evaluations are kept but excluded from the front") {
  const ParameterSpace space({ParameterDef("x", IntRange{0, 3, 1}), ParameterDef("y", IntRange{0, 3, 1})});
  EvaluatorSpec spec;
  spec.kind = ExternalEvaluator{{kStubs + "/echo_params.sh"}, 10.0};
  spec.objectives = {{"cost", Orientation::minimize}, {"quality", Orientation::maximize}};
  auto cfg = small_config(16, 3);
  cfg.random_budget = 6;
  const auto state = explore(space, spec, cfg);
  CHECK(state.evaluations.size() == 16);
  std::size_t fails = 0;
  for (const auto& e : state.evaluations) {
    const bool x_zero = std::get<std::int64_t>(*e.point.find("x")) == 0;
    CHECK((e.status == Status::fail) == x_zero);
    fails += !e.ok();
  }
  CHECK(fails == 4);
  for (const auto& m : state.front.members) CHECK(std::get<std::int64_t>(*m.point.find("x")) != 0);
  // quality is maximized, so stored values are negated
  for (const auto& m : state.front.members) CHECK(m.objectives[1] <= 0.0);
}

TEST_CASE("explore failure modes") {
  SUBCASE("every random-phase evaluation fails") {
    const ParameterSpace space({ParameterDef("x", IntRange{0, 0, 1}), ParameterDef("y", IntRange{0, 9, 1})});
    EvaluatorSpec spec{ExternalEvaluator{{kStubs + "/echo_params.sh"}, 10.0}, {{"cost"}, {"quality"}}};
    try {
      explore(space, spec, small_config(6, 1));
      FAIL("expected runtime error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::runtime);
    }
  }
  SUBCASE("spawn failure aborts") {
    EvaluatorSpec spec{ExternalEvaluator{{kStubs + "/missing.sh"}, 10.0}, {{"cost"}}};
    try {
      explore(grid(1, 5), spec, small_config(4, 1));
      FAIL("expected spawn failure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::spawn_failure);
    }
  }
}

TEST_CASE("kappa zero with an exact surrogate selects exactly the predicted non-dominated points") {
  const auto space = grid(2, 5);
  const auto all = space.enumerate();
  std::vector<std::vector<double>> X;
  std::vector<ObjectiveVector> truth;
  for (const auto& idx : all) {
    X.push_back(space.encode_indices(idx));
    truth.push_back(builtin_zdt1(space, space.point_at(idx)));
  }
  ForestParams fp;
  fp.tree_count = 5;
  fp.min_leaf = 1;
  fp.bootstrap = false;
  fp.feature_fraction = 1.0;
  std::vector<Forest> forests;
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> y;
    for (const auto& t : truth) y.push_back(t[j]);
    forests.push_back(fit_forest(X, y, fp, RandomStream(j)));
  }

  RandomStream rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    // A random evaluated subset provides the front; the rest are candidates.
    std::vector<ObjectiveVector> evaluated;
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (rng.uniform_index(3) == 0) {
        evaluated.push_back(truth[i]);
        continue;
      }
      Candidate c{all[i], X[i], {}, 0.0};
      for (const auto& f : forests) {
        const auto p = f.predict(X[i]);
        c.optimistic.push_back(p.mean - 0.0 * p.spread);
        c.total_spread += p.spread;
      }
      for (std::size_t j = 0; j < 2; ++j) REQUIRE(c.optimistic[j] == doctest::Approx(truth[i][j]).epsilon(1e-12));
      candidates.push_back(std::move(c));
    }
    if (evaluated.empty() || candidates.empty()) continue;
    std::vector<ObjectiveVector> front;
    for (auto k : oracle::brute_force_front(std::vector<std::vector<double>>(evaluated.begin(), evaluated.end())))
      front.push_back(evaluated[k]);

    std::set<std::size_t> expected;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      bool dominated = false;
      for (const auto& f : front) dominated = dominated || oracle::dominates(f, candidates[i].optimistic);
      if (!dominated) expected.insert(i);
    }
    const std::vector<double> ref{1.1, 11.0};
    const auto chosen = select_batch(candidates, front, ref, expected.size());
    CHECK(std::set<std::size_t>(chosen.begin(), chosen.end()) == expected);

    // Asking for more fills with dominated candidates only after every survivor.
    const auto more = select_batch(candidates, front, ref, candidates.size());
    CHECK(more.size() == candidates.size());
    CHECK(std::set<std::size_t>(more.begin(), more.begin() + long(expected.size())) == expected);
  }
}

TEST_CASE("select_batch ranks by hypervolume contribution") {
  const std::vector<ObjectiveVector> front = {{0.0, 4.0}, {4.0, 0.0}};
  const std::vector<double> ref{5.0, 5.0};
  std::vector<Candidate> c(3);
  c[0] = {{0}, {0.0}, {3.0, 3.0}, 0.0};  // contribution 1 x 1... clipped by the front
  c[1] = {{1}, {1.0}, {1.0, 1.0}, 0.0};  // largest gain
  c[2] = {{2}, {2.0}, {2.0, 2.0}, 0.0};
  // After (1,1) is picked both others are covered by it; the encoding decides.
  CHECK(select_batch(c, front, ref, 3) == std::vector<std::size_t>{1, 0, 2});
  CHECK(select_batch(c, front, ref, 1) == std::vector<std::size_t>{1});
  CHECK(hypervolume_contribution(std::vector<double>{1.0, 1.0}, front, ref) == doctest::Approx(9.0));
  CHECK(hypervolume_contribution(std::vector<double>{3.0, 3.0}, front, ref) == doctest::Approx(1.0));

  // Equal contributions: larger spread first, then lower encoding.
  std::vector<Candidate> tie(3);
  tie[0] = {{0}, {2.0}, {2.0, 2.0}, 0.1};
  tie[1] = {{1}, {1.0}, {2.0, 2.0}, 0.1};
  tie[2] = {{2}, {3.0}, {2.0, 2.0}, 0.5};
  CHECK(select_batch(tie, front, ref, 3) == std::vector<std::size_t>{2, 1, 0});
}

TEST_CASE("select_batch spreads a batch instead of stacking near-duplicates") {
  const std::vector<ObjectiveVector> front = {{0.0, 4.0}, {4.0, 0.0}};
  const std::vector<double> ref{5.0, 5.0};
  std::vector<Candidate> c(3);
  c[0] = {{0}, {0.0}, {1.0, 1.0}, 0.0};    // alone: 9
  c[1] = {{1}, {1.0}, {1.01, 1.01}, 0.0};  // alone: about 8.94, nothing once c[0] is picked
  c[2] = {{2}, {2.0}, {0.5, 3.5}, 0.0};    // alone: 1.75, still 0.25 after c[0]
  CHECK(hypervolume_contribution(std::vector<double>{0.5, 3.5}, front, ref) == doctest::Approx(1.75));
  CHECK(select_batch(c, front, ref, 2) == std::vector<std::size_t>{0, 2});
  CHECK(select_batch(c, front, ref, 3) == std::vector<std::size_t>{0, 2, 1});
}

TEST_CASE("exploration config parsing") {
  const auto c = parse_exploration_config(nlohmann::ordered_json::parse(
      R"({"total_budget":50,"random_budget":10,"batch_size":5,"kappa":0.5,"forest":{"tree_count":10,"max_depth":4}})"));
  CHECK(c.total_budget == 50);
  CHECK(c.effective_random_budget() == 10);
  CHECK(c.batch_size == 5);
  CHECK(c.kappa == 0.5);
  CHECK(c.forest.tree_count == 10);
  CHECK(c.forest.max_depth == 4u);
  CHECK(parse_exploration_config(nlohmann::ordered_json::parse(to_json(c).dump())).total_budget == 50);
  CHECK(parse_exploration_config(nlohmann::ordered_json::object()).effective_random_budget() == 33);

  for (const char* bad : {R"({"total_budget":0})", R"({"total_budget":5,"random_budget":6})", R"({"batch_size":0})",
                          R"({"kappa":-1})", R"({"mystery":1})", R"({"total_budget":"ten"})"})
    CHECK_THROWS_AS(parse_exploration_config(nlohmann::ordered_json::parse(bad)), Error);
}

TEST_CASE("four objectives use the Monte Carlo trace and still track the front") {
  const ParameterSpace space({ParameterDef("x", IntRange{0, 6, 1}), ParameterDef("y", IntRange{0, 6, 1})});
  EvaluatorSpec spec{ExternalEvaluator{{kStubs + "/four_objectives.sh"}, 10.0}, {{"a"}, {"b"}, {"c"}, {"d"}}};
  auto cfg = small_config(24, 12);
  cfg.trace_samples = 20'000;
  cfg.parallelism = 4;
  const auto state = explore(space, spec, cfg);
  CHECK(state.evaluations.size() == 24);
  CHECK(state.reference.size() == 4);
  for (std::size_t i = 1; i < state.hv_trace.size(); ++i) CHECK(state.hv_trace[i] >= state.hv_trace[i - 1]);
  CHECK(state.front.members.size() == brute_front_of(state.evaluations).size());
  CHECK(without_timing(explore(space, spec, cfg).evaluations) == without_timing(state.evaluations));
}
