#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spillcast {

enum class Errc {
  // input / usage
  MissingFile,
  ParseError,
  GapTooLong,
  RangeViolation,
  NonWeeklySpacing,
  NegativeCount,
  UnknownKey,
  InvariantViolation,
  LengthMismatch,
  InsufficientData,
  EmptyHistory,
  TooShort,
  HistoryTooShort,
  NoCasesInYear,
  TooFewSamples,
  EmptyCurve,
  UnnormalizedDist,
  TooFewObservations,
  WeekMismatch,
  EmptyYear,
  TooFewYears,
  ZeroVariance,
  TooFewResiduals,
  NoUsableBin,
  Usage,
  // numerical
  NonFiniteInput,
  BlowUp,
  ZeroDenominator,
  SingularDesign,
  DegenerateBin,
  ZeroBandwidth,
  ZeroEvidence,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::ParseError: return "ParseError";
    case Errc::GapTooLong: return "GapTooLong";
    case Errc::RangeViolation: return "RangeViolation";
    case Errc::NonWeeklySpacing: return "NonWeeklySpacing";
    case Errc::NegativeCount: return "NegativeCount";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::EmptyHistory: return "EmptyHistory";
    case Errc::TooShort: return "TooShort";
    case Errc::HistoryTooShort: return "HistoryTooShort";
    case Errc::NoCasesInYear: return "NoCasesInYear";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::EmptyCurve: return "EmptyCurve";
    case Errc::UnnormalizedDist: return "UnnormalizedDist";
    case Errc::TooFewObservations: return "TooFewObservations";
    case Errc::WeekMismatch: return "WeekMismatch";
    case Errc::EmptyYear: return "EmptyYear";
    case Errc::TooFewYears: return "TooFewYears";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::TooFewResiduals: return "TooFewResiduals";
    case Errc::NoUsableBin: return "NoUsableBin";
    case Errc::Usage: return "Usage";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::BlowUp: return "BlowUp";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::SingularDesign: return "SingularDesign";
    case Errc::DegenerateBin: return "DegenerateBin";
    case Errc::ZeroBandwidth: return "ZeroBandwidth";
    case Errc::ZeroEvidence: return "ZeroEvidence";
  }
  return "Unknown";
}

/// True for failures of the numerics (as opposed to bad input or usage).
inline bool is_numerical(Errc code) { return code >= Errc::NonFiniteInput; }

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace spillcast
