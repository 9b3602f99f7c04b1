#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace paretoscope {

struct ProcessResult {
  bool timed_out = false;
  int exit_code = -1;       // valid when the process exited normally
  int term_signal = 0;      // nonzero when killed by a signal
  std::string stdout_text;
  double wall_seconds = 0.0;

  bool exited_cleanly() const noexcept { return !timed_out && term_signal == 0 && exit_code == 0; }
};

/// Runs argv[0] (PATH lookup applies) with its stdout captured and stderr
/// inherited. The child gets its own process group; on timeout the whole
/// group is killed. Throws Error(spawn_failure) if the program cannot be
/// started at all.
ProcessResult run_process(const std::vector<std::string>& argv, std::chrono::duration<double> timeout);

}  // namespace paretoscope
