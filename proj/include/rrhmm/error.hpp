#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rrhmm {

enum class ErrorCode {
  InvalidArgument,
  RankMismatch,
  NotStochastic,
  NoConvergence,
  NonStationaryPrior,
  SymbolOutOfRange,
  ZeroProbabilitySequence,
  EmptyDataset,
  SequenceTooShort,
  EventSpaceTooLarge,
  RankTooLarge,
  DegenerateMoments,
  NotInvertible,
  DegenerateDenominator,
  DimensionMismatch,
  NotNormalized,
  SequenceSpaceTooLarge,
  OracleMismatch,
  Io,
};

std::string_view to_string(ErrorCode code);

//! Every library failure carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rrhmm
