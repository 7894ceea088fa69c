#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace greenlab {

enum class ErrorCode {
  InvalidParam,
  ParabolicMetric,
  TailFitError,
  NonSPDMetric,
  DomainError,
  DegenerateGradient,
  GridTooCoarse,
  NotPoleAnchored,
  NotClosedForm,
  HypothesisViolated,
  HypothesisNotMet,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::ParabolicMetric: return "ParabolicMetric";
    case ErrorCode::TailFitError: return "TailFitError";
    case ErrorCode::NonSPDMetric: return "NonSPDMetric";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::NotPoleAnchored: return "NotPoleAnchored";
    case ErrorCode::NotClosedForm: return "NotClosedForm";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::HypothesisNotMet: return "HypothesisNotMet";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace greenlab
