#include "fairlens/errors.hpp"

namespace fairlens {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::DuplicateEdge: return "DuplicateEdge";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::NotInterior: return "NotInterior";
    case Errc::EndpointConditioned: return "EndpointConditioned";
    case Errc::OverlappingSets: return "OverlappingSets";
    case Errc::RolesUnset: return "RolesUnset";
    case Errc::PathBudgetExceeded: return "PathBudgetExceeded";
    case Errc::MissingMechanism: return "MissingMechanism";
    case Errc::ParentMismatch: return "ParentMismatch";
    case Errc::BadParameter: return "BadParameter";
    case Errc::UnsupportedMechanism: return "UnsupportedMechanism";
    case Errc::MissingNoise: return "MissingNoise";
    case Errc::BackdoorViolated: return "BackdoorViolated";
    case Errc::EmptyStratum: return "EmptyStratum";
    case Errc::NoDirectEdge: return "NoDirectEdge";
    case Errc::DegenerateConditioning: return "DegenerateConditioning";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::InconsistentRecord: return "InconsistentRecord";
    case Errc::NotDescendant: return "NotDescendant";
    case Errc::LabelUnknown: return "LabelUnknown";
    case Errc::NonBinaryColumn: return "NonBinaryColumn";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::NoPositivePredictions: return "NoPositivePredictions";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::SemanticError: return "SemanticError";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::CsvParseError: return "CsvParseError";
  }
  return "UnknownError";
}

bool is_numeric_error(Errc code) noexcept {
  switch (code) {
    case Errc::PathBudgetExceeded:
    case Errc::EmptyStratum:
    case Errc::DegenerateConditioning:
    case Errc::SingularSystem:
    case Errc::InconsistentRecord:
    case Errc::ZeroDenominator:
    case Errc::DegenerateLabels:
    case Errc::NoPositivePredictions:
      return true;
    default:
      return false;
  }
}

}  // namespace fairlens
