#include "fpt/error.hpp"

namespace fpt {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kMissingValue: return "MissingValue";
    case Errc::kSpaceMismatch: return "SpaceMismatch";
    case Errc::kMalformedDistribution: return "MalformedDistribution";
    case Errc::kNotTerminating: return "NotTerminating";
    case Errc::kBadTimestep: return "BadTimestep";
    case Errc::kNotDirac: return "NotDirac";
    case Errc::kIncomparable: return "Incomparable";
    case Errc::kNotConsistent: return "NotConsistent";
    case Errc::kNotAPath: return "NotAPath";
    case Errc::kUnknownState: return "UnknownState";
    case Errc::kSyntaxError: return "SyntaxError";
    case Errc::kUnknownFunction: return "UnknownFunction";
    case Errc::kBudgetExceeded: return "BudgetExceeded";
    case Errc::kNotAdapted: return "NotAdapted";
    case Errc::kNotFound: return "NotFound";
    case Errc::kResourceLimit: return "ResourceLimit";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kInvalidFile: return "InvalidFile";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code) {}

SyntaxError::SyntaxError(std::size_t position, const std::string& message)
    : Error(Errc::kSyntaxError,
            "at offset " + std::to_string(position) + ": " + message),
      position_(position) {}

}  // namespace fpt
