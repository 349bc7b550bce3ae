#pragma once

#include <stdexcept>
#include <string>

namespace fmplan {

// Wrench/pose frame bookkeeping violations.
struct FrameError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid model parameters (negative mass, nonpositive stiffness, bad joint data, ...).
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Domain/problem text errors, with source location.
struct ParseError : std::runtime_error {
  int line = 0;
  int col = 0;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " + std::to_string(col_) + ")"),
        line(line_), col(col_) {}
};

// LP solver failed numerically; distinct from an "unstable" verdict.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Applying an operator whose precondition does not hold, mismatched arities, etc.
struct PlanningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scene/scenario file content problems.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fmplan
