#include "licp/error.hpp"

namespace licp {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::NonPositiveEntry: return "NonPositiveEntry";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingularOutput: return "SingularOutput";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::InvalidEpsilon: return "InvalidEpsilon";
    case Errc::ZeroPerturbation: return "ZeroPerturbation";
    case Errc::SizeCap: return "SizeCap";
    case Errc::BasisMismatch: return "BasisMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::FeasibilityFailure: return "FeasibilityFailure";
    case Errc::GapDetected: return "GapDetected";
    case Errc::InvalidK: return "InvalidK";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::ParseError: return "ParseError";
    case Errc::UsageError: return "UsageError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace licp
