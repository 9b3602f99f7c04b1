#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "paretoscope/pareto.hpp"
#include "paretoscope/space.hpp"

namespace paretoscope {

enum class Orientation { minimize, maximize };

struct ObjectiveDecl {
  std::string name;
  Orientation orientation = Orientation::minimize;
};

enum class Status { ok, fail };

const char* to_string(Status s);
const char* to_string(Orientation o);

/// One evaluated configuration. Objective values are stored in minimization
/// orientation, in the run's declared objective order.
struct Evaluation {
  ConfigPoint point;
  std::vector<std::pair<std::string, double>> objectives;
  Status status = Status::fail;
  double wall_time = 0.0;  // seconds
  std::uint64_t sequence_index = 0;
  std::string note;        // failure reason, empty when ok

  bool ok() const noexcept { return status == Status::ok; }
  /// Values in declared order; only meaningful when ok().
  ObjectiveVector objective_vector() const;
  std::optional<double> objective(std::string_view name) const;

  bool operator==(const Evaluation&) const = default;
};

struct BuiltinEvaluator {
  std::string name;  // "zdt1" or "kfusion_proxy"
};

struct ExternalEvaluator {
  std::vector<std::string> command;  // argv prefix; `--param name=value` arguments are appended
  double timeout_seconds = 60.0;
};

struct EvaluatorSpec {
  std::variant<BuiltinEvaluator, ExternalEvaluator> kind;
  std::vector<ObjectiveDecl> objectives;

  /// Throws Error(invalid_input) when an invariant is violated.
  void validate() const;
  std::vector<std::string> objective_names() const;
};

/// Objectives produced by a builtin, all minimized.
std::vector<ObjectiveDecl> builtin_objectives(const std::string& name);

/// Parses `{"kind":"builtin","name":...}` or `{"kind":"external","command":...,
/// "timeout_s":...}` with an optional "objectives" list. Builtins default to
/// their own objective list.
EvaluatorSpec parse_evaluator(const nlohmann::ordered_json& doc);
nlohmann::ordered_json to_json(const EvaluatorSpec& spec);

/// Metrics reported by one external run, before orientation is applied.
struct ProtocolOutput {
  std::map<std::string, double> metrics;
  std::optional<Status> status;  // absent when no STATUS line was printed
};

/// Scans evaluator stdout for `METRIC <name> <float>` and `STATUS ok|fail`
/// lines; everything else is ignored. Later lines win on repeats.
ProtocolOutput parse_protocol(const std::string& stdout_text);

/// `--param <name>=<value>` arguments in declaration order.
std::vector<std::string> param_arguments(const ConfigPoint& point);

/// Evaluates one point. Benchmark failures (nonzero exit, timeout, missing
/// metric, STATUS fail, non-finite metric) come back as status=fail; only a
/// failure to start the process throws (Error(spawn_failure)). The returned
/// sequence_index is 0; the caller assigns it.
Evaluation evaluate(const EvaluatorSpec& spec, const ConfigPoint& point, const ParameterSpace* space = nullptr);

/// ZDT1: f1 = x1, g = 1 + 9 * mean(x2..xd), f2 = g * (1 - sqrt(f1 / g)).
/// Throws Error(invalid_input) for components outside [0, 1] or empty x.
ObjectiveVector builtin_zdt1(std::span<const double> x);

/// ZDT1 over a discrete space: parameter i maps to index_i / (size_i - 1)
/// (a single-valued parameter maps to 0).
ObjectiveVector builtin_zdt1(const ParameterSpace& space, const ConfigPoint& point);

/// The KinectFusion-style proxy space (volume_res, icp_iters,
/// pyramid_levels, integrate_rate).
ParameterSpace kfusion_proxy_space();

/// Analytic (runtime [s], ate [m], energy [J]) model over kfusion_proxy_space()
/// with deterministic, config-seeded noise of relative amplitude <= 1%.
ObjectiveVector builtin_kfusion_proxy(const ConfigPoint& point);

}  // namespace paretoscope
