#pragma once

#include <stdexcept>
#include <string>

namespace fairlens {

// Every failure the library reports deliberately.  The CLI maps these to
// exit codes: validation-class errors exit 3, numeric-class errors exit 4.
enum class Errc {
  // graph construction / queries
  CycleDetected,
  UnknownNode,
  DuplicateEdge,
  DuplicateNode,
  NotInterior,
  EndpointConditioned,
  OverlappingSets,
  RolesUnset,
  PathBudgetExceeded,
  // structural models
  MissingMechanism,
  ParentMismatch,
  BadParameter,
  UnsupportedMechanism,
  MissingNoise,
  // effects / counterfactuals
  BackdoorViolated,
  EmptyStratum,
  NoDirectEdge,
  DegenerateConditioning,
  SingularSystem,
  InconsistentRecord,
  NotDescendant,
  LabelUnknown,
  // metrics
  NonBinaryColumn,
  EmptyGroup,
  DegenerateLabels,
  NoPositivePredictions,
  ZeroDenominator,
  // parsing / io
  SyntaxError,
  SemanticError,
  MissingColumn,
  CsvParseError,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

const char* errc_name(Errc code) noexcept;

// True for failures of numeric routines (singular systems, empty strata,
// degenerate conditioning, exhausted path budgets) as opposed to bad input.
bool is_numeric_error(Errc code) noexcept;

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, std::string(errc_name(code)) + ": " + message);
}

}  // namespace fairlens
