#pragma once

#include <stdexcept>
#include <string>

namespace treeot {

// Error identities surfaced by the library. The CLI maps these onto process
// exit codes; tests match on them instead of message text.
enum class Errc {
  cycle_detected,
  disconnected_node,
  duplicate_edge,
  negative_weight,
  invalid_node,
  length_mismatch,
  dimension_mismatch,
  solver_failure,
  nonfinite_value,
  empty_input,
  invalid_config,
  io_error,
};

inline const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::cycle_detected: return "cycle_detected";
    case Errc::disconnected_node: return "disconnected_node";
    case Errc::duplicate_edge: return "duplicate_edge";
    case Errc::negative_weight: return "negative_weight";
    case Errc::invalid_node: return "invalid_node";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::solver_failure: return "solver_failure";
    case Errc::nonfinite_value: return "nonfinite_value";
    case Errc::empty_input: return "empty_input";
    case Errc::invalid_config: return "invalid_config";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

class TreeotError : public std::runtime_error {
 public:
  TreeotError(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) {
  throw TreeotError(code, msg);
}

// The const char* overload keeps successful checks allocation-free, which the
// hot paths rely on; call sites that compose a dynamic message should test the
// condition themselves and only then build the string for fail().
inline void require(bool cond, Errc code, const char* msg) {
  if (!cond) [[unlikely]] fail(code, msg);
}

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) [[unlikely]] fail(code, msg);
}

}  // namespace treeot
