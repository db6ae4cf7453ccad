#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfilab {

enum class ErrorCode {
  InvalidArgument,
  NegativeSpectrum,
  InsufficientSamples,
  QuadratureOverflow,
  DuplicateDecoration,
  MissingDecoration,
  SaturationBudgetExceeded,
  EmptyConfiguration,
  UnboundedGSet,
  UnsupportedGenerator,
  NonSmoothObservable,
  BoundaryHit,
  DegenerateSamples,
  InfluenceViolation,
  QuarterConditionViolated,
  ZeroObservable,
  WeightSupportNotCovered,
  MixedReportKinds,
  ConfigValidation,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal diagnostics (e.g. hardcore intensity above the proven regime).
void warn(std::string_view message);

}  // namespace mfilab
