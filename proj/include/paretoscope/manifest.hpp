#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "paretoscope/evaluator.hpp"
#include "paretoscope/explorer.hpp"
#include "paretoscope/space.hpp"

namespace paretoscope {

inline constexpr int kManifestVersion = 1;

/// Everything needed to reproduce an exploration run.
///
/// Document layout:
///   {
///     "schema_version": 1,
///     "space": "space.json" | { ...inline parameter-space document... },
///     "evaluator": { "kind": "builtin", "name": "zdt1" }
///                | { "kind": "external", "command": ["./bench.sh"], "timeout_s": 30,
///                    "objectives": [{"name": "runtime", "orientation": "minimize"}] },
///     "exploration": { "total_budget": 300, "random_budget": 100, ... },
///     "seed": 42,
///     "metadata": { ... free-form ... }
///   }
///
/// Relative paths (the space file, an external command containing '/') are
/// resolved against the manifest's directory.
struct RunManifest {
  std::optional<std::filesystem::path> space_path;
  nlohmann::ordered_json space_document;
  ParameterSpace space;
  EvaluatorSpec evaluator;
  ExplorationConfig exploration;
  std::uint64_t seed = 0;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  int schema_version = kManifestVersion;
};

/// Throws Error(invalid_input) for malformed documents or missing files.
RunManifest load_manifest(const std::filesystem::path& path);
RunManifest parse_manifest(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir);

/// Resolved, self-contained form (space inlined, effective seed) written
/// next to the run log.
nlohmann::ordered_json to_json(const RunManifest& m, const std::optional<std::string>& created);

/// PARETOSCOPE_SEED, when set, overrides the manifest seed. Throws
/// Error(invalid_input) if it is not an unsigned integer.
std::optional<std::uint64_t> seed_from_environment();

}  // namespace paretoscope
