#include "paretoscope/manifest.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "paretoscope/error.hpp"

namespace paretoscope {

namespace {

RunManifest build(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw invalid_input("manifest must be a JSON object");
  static const std::set<std::string> kKeys = {"schema_version", "space", "evaluator", "exploration",
                                              "seed",           "metadata", "created"};
  for (const auto& [k, _] : doc.items())
    if (!kKeys.count(k)) throw invalid_input("manifest: unknown field '" + k + "'");

  const int version = doc.value("schema_version", kManifestVersion);
  if (version != kManifestVersion) throw invalid_input("manifest: unsupported schema_version " + std::to_string(version));
  if (!doc.contains("space")) throw invalid_input("manifest: missing 'space'");
  if (!doc.contains("evaluator")) throw invalid_input("manifest: missing 'evaluator'");

  std::optional<std::filesystem::path> space_path;
  nlohmann::ordered_json space_doc;
  const auto& space_ref = doc.at("space");
  ParameterSpace space = [&] {
    if (space_ref.is_string()) {
      std::filesystem::path p = space_ref.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      if (!std::filesystem::exists(p)) throw invalid_input("manifest: space document " + p.string() + " does not exist");
      space_path = p;
      auto s = load_space(p);
      space_doc = to_json(s);
      return s;
    }
    space_doc = space_ref;
    return parse_space(space_ref);
  }();

  EvaluatorSpec evaluator = parse_evaluator(doc.at("evaluator"));
  if (auto* ext = std::get_if<ExternalEvaluator>(&evaluator.kind)) {
    std::filesystem::path exe = ext->command.front();
    if (exe.is_relative() && ext->command.front().find('/') != std::string::npos)
      ext->command.front() = (base_dir / exe).lexically_normal().string();
  }

  ExplorationConfig exploration = doc.contains("exploration")
                                      ? parse_exploration_config(doc.at("exploration"))
                                      : ExplorationConfig{};
  std::uint64_t seed = exploration.seed;
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) throw invalid_input("manifest: seed must be an unsigned integer");
    seed = doc.at("seed").get<std::uint64_t>();
  }
  exploration.seed = seed;

  RunManifest m{space_path, std::move(space_doc), std::move(space), std::move(evaluator), std::move(exploration), seed};
  m.schema_version = version;
  if (doc.contains("metadata")) m.metadata = doc.at("metadata");
  return m;
}

}  // namespace

RunManifest parse_manifest(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir) {
  try {
    return build(doc, base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot read manifest " + path.string());
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_input("malformed manifest " + path.string() + ": " + e.what());
  }
  return parse_manifest(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

nlohmann::ordered_json to_json(const RunManifest& m, const std::optional<std::string>& created) {
  nlohmann::ordered_json j;
  j["schema_version"] = m.schema_version;
  j["space"] = m.space_document;
  j["evaluator"] = to_json(m.evaluator);
  auto exploration = to_json(m.exploration);
  exploration.erase("seed");
  j["exploration"] = exploration;
  j["seed"] = m.seed;
  j["metadata"] = m.metadata;
  if (created) j["created"] = *created;
  return j;
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("PARETOSCOPE_SEED");
  if (!raw || !*raw) return std::nullopt;
  const std::string text(raw);
  if (text.find_first_not_of("0123456789") != std::string::npos)
    throw invalid_input("PARETOSCOPE_SEED must be an unsigned integer, got '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw invalid_input("PARETOSCOPE_SEED out of range: '" + text + "'");
  }
}

}  // namespace paretoscope
