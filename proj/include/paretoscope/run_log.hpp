#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "paretoscope/evaluator.hpp"

namespace paretoscope {

inline constexpr const char* kRunLogSchema = "paretoscope.runlog";
inline constexpr int kRunLogVersion = 1;

struct RunLogHeader {
  std::vector<ObjectiveDecl> objectives;
  nlohmann::ordered_json space;               // parameter-space document, may be null
  std::optional<std::string> created;         // omitted for reproducible logs
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();  // seed, config, ...
};

/// Hypervolume after a batch, measured against a fixed reference point.
struct ProgressRecord {
  std::uint64_t batch = 0;
  std::uint64_t evaluations = 0;
  double hypervolume = 0.0;
  std::vector<double> reference;

  bool operator==(const ProgressRecord&) const = default;
};

nlohmann::ordered_json to_json(const Evaluation& e);
Evaluation evaluation_from_json(const nlohmann::ordered_json& j);

/// Append-only JSON Lines writer: a header line, then one record per line,
/// each flushed as soon as it is written.
class RunLogWriter {
 public:
  /// Creates (or truncates) `path` and writes the header.
  RunLogWriter(const std::filesystem::path& path, const RunLogHeader& header);
  /// Opens an existing log for appending.
  explicit RunLogWriter(const std::filesystem::path& path);

  void append(const Evaluation& e);
  void append(const ProgressRecord& p);

 private:
  void write_line(const nlohmann::ordered_json& j);

  std::filesystem::path path_;
  std::ofstream out_;
};

struct LoadedLog {
  std::optional<RunLogHeader> header;
  std::vector<Evaluation> evaluations;   // ascending sequence_index
  std::vector<ProgressRecord> progress;  // file order
  std::vector<std::string> warnings;
};

/// Reads a run log. A malformed final line (an interrupted write) is dropped
/// with a warning; a malformed earlier line throws Error(invalid_input) with
/// its line number.
LoadedLog load_run_log(const std::filesystem::path& path);

/// Evaluations only.
std::vector<Evaluation> load_log(const std::filesystem::path& path);

}  // namespace paretoscope
