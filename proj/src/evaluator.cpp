#include "paretoscope/evaluator.hpp"

#include <chrono>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "paretoscope/error.hpp"
#include "paretoscope/process.hpp"
#include "paretoscope/random.hpp"

namespace paretoscope {

const char* to_string(Status s) { return s == Status::ok ? "ok" : "fail"; }
const char* to_string(Orientation o) { return o == Orientation::minimize ? "minimize" : "maximize"; }

ObjectiveVector Evaluation::objective_vector() const {
  ObjectiveVector v;
  v.reserve(objectives.size());
  for (const auto& [_, value] : objectives) v.push_back(value);
  return v;
}

std::optional<double> Evaluation::objective(std::string_view name) const {
  for (const auto& [n, v] : objectives)
    if (n == name) return v;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// EvaluatorSpec

std::vector<ObjectiveDecl> builtin_objectives(const std::string& name) {
  if (name == "zdt1") return {{"f1", Orientation::minimize}, {"f2", Orientation::minimize}};
  if (name == "kfusion_proxy")
    return {{"runtime", Orientation::minimize}, {"ate", Orientation::minimize}, {"energy", Orientation::minimize}};
  throw invalid_input("unknown builtin evaluator '" + name + "' (expected zdt1 or kfusion_proxy)");
}

void EvaluatorSpec::validate() const {
  if (objectives.empty()) throw invalid_input("evaluator must declare at least one objective");
  std::set<std::string> names;
  static const std::regex kName("[A-Za-z0-9_]+");
  for (const auto& o : objectives) {
    if (!std::regex_match(o.name, kName)) throw invalid_input("invalid objective name '" + o.name + "'");
    if (!names.insert(o.name).second) throw invalid_input("duplicate objective '" + o.name + "'");
  }
  if (const auto* b = std::get_if<BuiltinEvaluator>(&kind)) {
    std::set<std::string> provided;
    for (const auto& o : builtin_objectives(b->name)) provided.insert(o.name);
    for (const auto& o : objectives)
      if (!provided.count(o.name))
        throw invalid_input("builtin '" + b->name + "' does not produce objective '" + o.name + "'");
  } else {
    const auto& e = std::get<ExternalEvaluator>(kind);
    if (e.command.empty() || e.command.front().empty()) throw invalid_input("external evaluator command is empty");
    if (!(e.timeout_seconds > 0.0)) throw invalid_input("external evaluator timeout must be positive");
  }
}

std::vector<std::string> EvaluatorSpec::objective_names() const {
  std::vector<std::string> names;
  for (const auto& o : objectives) names.push_back(o.name);
  return names;
}

EvaluatorSpec parse_evaluator(const nlohmann::ordered_json& doc) {
  try {
    if (!doc.is_object()) throw invalid_input("evaluator must be a JSON object");
    EvaluatorSpec spec;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "builtin") {
      const auto name = doc.at("name").get<std::string>();
      spec.kind = BuiltinEvaluator{name};
      spec.objectives = builtin_objectives(name);
    } else if (kind == "external") {
      ExternalEvaluator e;
      const auto& cmd = doc.at("command");
      if (cmd.is_string()) {
        std::istringstream ss(cmd.get<std::string>());
        for (std::string tok; ss >> tok;) e.command.push_back(tok);
      } else {
        e.command = cmd.get<std::vector<std::string>>();
      }
      if (doc.contains("timeout_s")) e.timeout_seconds = doc.at("timeout_s").get<double>();
      spec.kind = std::move(e);
    } else {
      throw invalid_input("evaluator kind must be 'builtin' or 'external', got '" + kind + "'");
    }
    if (doc.contains("objectives")) {
      spec.objectives.clear();
      for (const auto& o : doc.at("objectives")) {
        ObjectiveDecl d;
        if (o.is_string()) {
          d.name = o.get<std::string>();
        } else {
          d.name = o.at("name").get<std::string>();
          const auto orient = o.value("orientation", std::string("minimize"));
          if (orient == "maximize")
            d.orientation = Orientation::maximize;
          else if (orient != "minimize")
            throw invalid_input("objective '" + d.name + "': orientation must be minimize or maximize");
        }
        spec.objectives.push_back(std::move(d));
      }
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input(std::string("malformed evaluator description: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const EvaluatorSpec& spec) {
  nlohmann::ordered_json j;
  if (const auto* b = std::get_if<BuiltinEvaluator>(&spec.kind)) {
    j["kind"] = "builtin";
    j["name"] = b->name;
  } else {
    const auto& e = std::get<ExternalEvaluator>(spec.kind);
    j["kind"] = "external";
    j["command"] = e.command;
    j["timeout_s"] = e.timeout_seconds;
  }
  auto& objs = j["objectives"] = nlohmann::ordered_json::array();
  for (const auto& o : spec.objectives) objs.push_back({{"name", o.name}, {"orientation", to_string(o.orientation)}});
  return j;
}

// ---------------------------------------------------------------------------
// Protocol

ProtocolOutput parse_protocol(const std::string& stdout_text) {
  static const std::regex kMetric("^METRIC ([A-Za-z0-9_]+) ([-+0-9.eE]+)$");
  static const std::regex kStatus("^STATUS (ok|fail)$");
  ProtocolOutput out;
  std::istringstream lines(stdout_text);
  std::smatch m;
  for (std::string line; std::getline(lines, line);) {
    if (std::regex_match(line, m, kMetric)) {
      // The character class admits strings like "1e" or "--"; those are not numbers.
      const std::string text = m[2].str();
      char* end = nullptr;
      const double v = std::strtod(text.c_str(), &end);
      if (end == text.c_str() + text.size()) out.metrics[m[1].str()] = v;
    } else if (std::regex_match(line, m, kStatus)) {
      out.status = m[1].str() == "ok" ? Status::ok : Status::fail;
    }
  }
  return out;
}

std::vector<std::string> param_arguments(const ConfigPoint& point) {
  std::vector<std::string> args;
  for (const auto& a : point.assignment) {
    args.emplace_back("--param");
    args.push_back(a.name + "=" + to_string(a.value));
  }
  return args;
}

namespace {

Evaluation ingest(const ConfigPoint& point, const std::vector<ObjectiveDecl>& decls,
                  const std::map<std::string, double>& metrics) {
  Evaluation e;
  e.point = point;
  e.status = Status::ok;
  for (const auto& d : decls) {
    const auto it = metrics.find(d.name);
    if (it == metrics.end()) {
      e.status = Status::fail;
      e.note = "missing metric '" + d.name + "'";
      e.objectives.clear();
      return e;
    }
    if (!std::isfinite(it->second)) {
      e.status = Status::fail;
      e.note = "non-finite metric '" + d.name + "'";
      e.objectives.clear();
      return e;
    }
    e.objectives.emplace_back(d.name, d.orientation == Orientation::maximize ? -it->second : it->second);
  }
  return e;
}

Evaluation evaluate_external(const ExternalEvaluator& ext, const std::vector<ObjectiveDecl>& decls,
                             const ConfigPoint& point) {
  auto argv = ext.command;
  for (auto& a : param_arguments(point)) argv.push_back(std::move(a));
  const ProcessResult run = run_process(argv, std::chrono::duration<double>(ext.timeout_seconds));

  Evaluation e;
  e.point = point;
  e.wall_time = run.wall_seconds;
  if (run.timed_out) {
    e.note = "timeout after " + std::to_string(ext.timeout_seconds) + " s";
    return e;
  }
  if (run.term_signal != 0) {
    e.note = "killed by signal " + std::to_string(run.term_signal);
    return e;
  }
  if (run.exit_code != 0) {
    e.note = "exit code " + std::to_string(run.exit_code);
    return e;
  }
  const ProtocolOutput out = parse_protocol(run.stdout_text);
  if (out.status == Status::fail) {
    e.note = "benchmark reported STATUS fail";
    return e;
  }
  Evaluation ingested = ingest(point, decls, out.metrics);
  ingested.wall_time = run.wall_seconds;
  return ingested;
}

}  // namespace

Evaluation evaluate(const EvaluatorSpec& spec, const ConfigPoint& point, const ParameterSpace* space) {
  if (space) space->validate(point);
  if (const auto* ext = std::get_if<ExternalEvaluator>(&spec.kind)) return evaluate_external(*ext, spec.objectives, point);

  const auto& name = std::get<BuiltinEvaluator>(spec.kind).name;
  const auto start = std::chrono::steady_clock::now();
  ObjectiveVector values;
  if (name == "zdt1") {
    if (!space) throw invalid_input("builtin zdt1 needs the parameter space to normalise values");
    values = builtin_zdt1(*space, point);
  } else if (name == "kfusion_proxy") {
    values = builtin_kfusion_proxy(point);
  } else {
    throw invalid_input("unknown builtin evaluator '" + name + "'");
  }
  std::map<std::string, double> metrics;
  const auto produced = builtin_objectives(name);
  for (std::size_t i = 0; i < produced.size(); ++i) metrics[produced[i].name] = values[i];
  Evaluation e = ingest(point, spec.objectives, metrics);
  e.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return e;
}

// ---------------------------------------------------------------------------
// Builtins

ObjectiveVector builtin_zdt1(std::span<const double> x) {
  if (x.empty()) throw invalid_input("zdt1 needs at least one component");
  for (double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw invalid_input("zdt1 component " + std::to_string(v) + " outside [0, 1]");
  const double f1 = x[0];
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i];
  const double g = x.size() > 1 ? 1.0 + 9.0 * tail / static_cast<double>(x.size() - 1) : 1.0;
  const double f2 = g * (1.0 - std::sqrt(f1 / g));
  return {f1, f2};
}

ObjectiveVector builtin_zdt1(const ParameterSpace& space, const ConfigPoint& point) {
  const IndexVector idx = space.indices_of(point);
  std::vector<double> x(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto size = space.params()[i].size();
    x[i] = size > 1 ? static_cast<double>(idx[i]) / static_cast<double>(size - 1) : 0.0;
  }
  return builtin_zdt1(x);
}

ParameterSpace kfusion_proxy_space() {
  return ParameterSpace({
      ParameterDef("volume_res", Exponent{2, 6, 9}, Value{std::int64_t{256}}),
      ParameterDef("icp_iters", IntRange{1, 20, 1}, Value{std::int64_t{10}}),
      ParameterDef("pyramid_levels", IntRange{1, 4, 1}, Value{std::int64_t{3}}),
      ParameterDef("integrate_rate", IntRange{1, 4, 1}, Value{std::int64_t{2}}),
  });
}

namespace {

/// Uniform in [-1, 1], a pure function of `key`.
double hashed_unit_noise(const std::string& key) {
  const std::uint64_t h = splitmix64(fnv1a64(key));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace

ObjectiveVector builtin_kfusion_proxy(const ConfigPoint& point) {
  static const ParameterSpace space = kfusion_proxy_space();
  std::int64_t v[4];
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& def = space.params()[i];
    const Value* value = point.find(def.name());
    if (!value) throw invalid_input("kfusion_proxy: missing parameter '" + def.name() + "'");
    if (!def.contains(*value))
      throw invalid_input("kfusion_proxy: parameter '" + def.name() + "' value " + to_string(*value) +
                          " outside the proxy domain");
    v[i] = std::get<std::int64_t>(*value);
  }
  const double scale = static_cast<double>(v[0]) / 64.0;  // 1, 2, 4, 8
  const auto icp = static_cast<double>(v[1]);
  const auto levels = static_cast<double>(v[2]);
  const auto rate = static_cast<double>(v[3]);

  const std::string key = "vr=" + std::to_string(v[0]) + ";icp=" + std::to_string(v[1]) +
                          ";pl=" + std::to_string(v[2]) + ";ir=" + std::to_string(v[3]);
  // ate noise ignores icp_iters so the tracking floor stays monotone.
  const std::string ate_key = "vr=" + std::to_string(v[0]) + ";pl=" + std::to_string(v[2]) +
                              ";ir=" + std::to_string(v[3]);
  constexpr double kNoise = 0.01;

  // Seconds per frame: volume work grows as scale^1.5, tracking linearly in ICP
  // iterations (min step ratio 3.0/2.9, above the worst-case noise ratio 1.01/0.99).
  const double runtime_clean = 0.004 * std::pow(scale, 1.5) * (1.0 + 0.1 * icp) * (1.0 + 0.25 * (levels - 1.0)) /
                               (1.0 + 0.3 * (rate - 1.0));
  const double runtime = runtime_clean * (1.0 + kNoise * hashed_unit_noise(key + "#runtime"));

  // Metres: finer volumes reconstruct better; tracking error shrinks with ICP
  // iterations until a floor at 10 iterations; sparse integration hurts.
  const double tracking = 0.05 * std::max(0.0, 10.0 - icp) / 9.0 / std::sqrt(levels);
  const double ate_clean = (0.01 + 0.03 / scale + tracking) * (1.0 + 0.1 * (rate - 1.0));
  const double ate = ate_clean * (1.0 + kNoise * hashed_unit_noise(ate_key + "#ate"));

  // Joules per frame: runtime times a power draw that rises with volume size.
  const double power = 0.6 + 0.05 * std::sqrt(scale) + 0.01 * levels;
  const double energy = runtime_clean * power * (1.0 + kNoise * hashed_unit_noise(key + "#energy"));

  return {runtime, ate, energy};
}

}  // namespace paretoscope
