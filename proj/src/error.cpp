#include "mfilab/error.hpp"

#include <iostream>

namespace mfilab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeSpectrum: return "NegativeSpectrum";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::QuadratureOverflow: return "QuadratureOverflow";
    case ErrorCode::DuplicateDecoration: return "DuplicateDecoration";
    case ErrorCode::MissingDecoration: return "MissingDecoration";
    case ErrorCode::SaturationBudgetExceeded: return "SaturationBudgetExceeded";
    case ErrorCode::EmptyConfiguration: return "EmptyConfiguration";
    case ErrorCode::UnboundedGSet: return "UnboundedGSet";
    case ErrorCode::UnsupportedGenerator: return "UnsupportedGenerator";
    case ErrorCode::NonSmoothObservable: return "NonSmoothObservable";
    case ErrorCode::BoundaryHit: return "BoundaryHit";
    case ErrorCode::DegenerateSamples: return "DegenerateSamples";
    case ErrorCode::InfluenceViolation: return "InfluenceViolation";
    case ErrorCode::QuarterConditionViolated: return "QuarterConditionViolated";
    case ErrorCode::ZeroObservable: return "ZeroObservable";
    case ErrorCode::WeightSupportNotCovered: return "WeightSupportNotCovered";
    case ErrorCode::MixedReportKinds: return "MixedReportKinds";
    case ErrorCode::ConfigValidation: return "ConfigValidation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

void warn(std::string_view message) { std::cerr << "mfilab warning: " << message << '\n'; }

}  // namespace mfilab
