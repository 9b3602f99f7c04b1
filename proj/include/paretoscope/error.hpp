#pragma once

#include <stdexcept>
#include <string>

namespace paretoscope {

/// Failure categories. The CLI maps each one onto a fixed exit code.
enum class ErrorKind {
  invalid_input,   // malformed documents, domain violations, bad arguments
  infeasible,      // constraint selection found no admissible member
  spawn_failure,   // an external evaluator could not be started
  runtime,         // everything else (e.g. every random-phase evaluation failed)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_input(const std::string& what) { return Error(ErrorKind::invalid_input, what); }

}  // namespace paretoscope
