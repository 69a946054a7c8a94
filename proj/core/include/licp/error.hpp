#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace licp {

enum class Errc {
  NonPositiveEntry,
  NotNormalized,
  DimensionMismatch,
  SingularOutput,
  ConvergenceFailure,
  InvalidEpsilon,
  ZeroPerturbation,
  SizeCap,
  BasisMismatch,
  EmptyInput,
  FeasibilityFailure,
  GapDetected,
  InvalidK,
  InvalidArgument,
  NumericalFailure,
  ParseError,
  UsageError,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace licp
