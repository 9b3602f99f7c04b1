#include "paretoscope/run_log.hpp"

#include <algorithm>
#include <set>

#include "paretoscope/error.hpp"

namespace paretoscope {

nlohmann::ordered_json to_json(const Evaluation& e) {
  nlohmann::ordered_json j;
  j["type"] = "evaluation";
  j["seq"] = e.sequence_index;
  j["status"] = to_string(e.status);
  j["point"] = to_json(e.point);
  auto& objs = j["objectives"] = nlohmann::ordered_json::object();
  for (const auto& [name, value] : e.objectives) objs[name] = value;
  j["wall_time"] = e.wall_time;
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

Evaluation evaluation_from_json(const nlohmann::ordered_json& j) {
  Evaluation e;
  e.sequence_index = j.at("seq").get<std::uint64_t>();
  const auto status = j.at("status").get<std::string>();
  if (status == "ok")
    e.status = Status::ok;
  else if (status == "fail")
    e.status = Status::fail;
  else
    throw invalid_input("unknown evaluation status '" + status + "'");
  e.point = config_from_json(j.at("point"));
  for (const auto& [name, value] : j.at("objectives").items()) e.objectives.emplace_back(name, value.get<double>());
  e.wall_time = j.at("wall_time").get<double>();
  e.note = j.value("note", std::string());
  return e;
}

namespace {

nlohmann::ordered_json header_to_json(const RunLogHeader& h) {
  nlohmann::ordered_json j;
  j["type"] = "header";
  j["schema"] = kRunLogSchema;
  j["version"] = kRunLogVersion;
  auto& objs = j["objectives"] = nlohmann::ordered_json::array();
  for (const auto& o : h.objectives) objs.push_back({{"name", o.name}, {"orientation", to_string(o.orientation)}});
  j["space"] = h.space;
  if (h.created) j["created"] = *h.created;
  for (const auto& [k, v] : h.extra.items()) j[k] = v;
  return j;
}

RunLogHeader header_from_json(const nlohmann::ordered_json& j) {
  if (j.at("schema").get<std::string>() != kRunLogSchema) throw invalid_input("not a paretoscope run log");
  if (j.at("version").get<int>() != kRunLogVersion)
    throw invalid_input("unsupported run log version " + j.at("version").dump());
  RunLogHeader h;
  for (const auto& o : j.at("objectives")) {
    const auto orient = o.at("orientation").get<std::string>();
    h.objectives.push_back({o.at("name").get<std::string>(),
                            orient == "maximize" ? Orientation::maximize : Orientation::minimize});
  }
  h.space = j.value("space", nlohmann::ordered_json());
  if (j.contains("created")) h.created = j.at("created").get<std::string>();
  static const std::set<std::string> kKnown = {"type", "schema", "version", "objectives", "space", "created"};
  for (const auto& [k, v] : j.items())
    if (!kKnown.count(k)) h.extra[k] = v;
  return h;
}

nlohmann::ordered_json progress_to_json(const ProgressRecord& p) {
  nlohmann::ordered_json j;
  j["type"] = "progress";
  j["batch"] = p.batch;
  j["evaluations"] = p.evaluations;
  j["hypervolume"] = p.hypervolume;
  j["reference"] = p.reference;
  return j;
}

ProgressRecord progress_from_json(const nlohmann::ordered_json& j) {
  return {j.at("batch").get<std::uint64_t>(), j.at("evaluations").get<std::uint64_t>(),
          j.at("hypervolume").get<double>(), j.at("reference").get<std::vector<double>>()};
}

}  // namespace

RunLogWriter::RunLogWriter(const std::filesystem::path& path, const RunLogHeader& header)
    : path_(path), out_(path, std::ios::out | std::ios::trunc) {
  if (!out_) throw invalid_input("cannot write run log " + path.string());
  write_line(header_to_json(header));
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::out | std::ios::app) {
  if (!out_) throw invalid_input("cannot append to run log " + path.string());
}

void RunLogWriter::append(const Evaluation& e) { write_line(to_json(e)); }
void RunLogWriter::append(const ProgressRecord& p) { write_line(progress_to_json(p)); }

void RunLogWriter::write_line(const nlohmann::ordered_json& j) {
  out_ << j.dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorKind::runtime, "write to run log " + path_.string() + " failed");
}

LoadedLog load_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot read run log " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) lines.pop_back();

  LoadedLog log;
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::ordered_json::parse(lines[i]);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        log.header = header_from_json(j);
      } else if (type == "evaluation") {
        auto e = evaluation_from_json(j);
        if (!seen.insert(e.sequence_index).second)
          throw invalid_input("duplicate sequence index " + std::to_string(e.sequence_index));
        log.evaluations.push_back(std::move(e));
      } else if (type == "progress") {
        log.progress.push_back(progress_from_json(j));
      } else {
        throw invalid_input("unknown record type '" + type + "'");
      }
    } catch (const std::exception& ex) {
      if (lineno == lines.size()) {
        log.warnings.push_back(path.string() + ":" + std::to_string(lineno) +
                               ": ignoring truncated final record (" + ex.what() + ")");
        break;
      }
      throw invalid_input(path.string() + ":" + std::to_string(lineno) + ": corrupt run log record: " + ex.what());
    }
  }
  std::stable_sort(log.evaluations.begin(), log.evaluations.end(),
                   [](const Evaluation& a, const Evaluation& b) { return a.sequence_index < b.sequence_index; });
  return log;
}

std::vector<Evaluation> load_log(const std::filesystem::path& path) { return load_run_log(path).evaluations; }

}  // namespace paretoscope
