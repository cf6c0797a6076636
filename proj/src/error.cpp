#include "rrhmm/error.hpp"

namespace rrhmm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonStationaryPrior: return "NonStationaryPrior";
    case ErrorCode::SymbolOutOfRange: return "SymbolOutOfRange";
    case ErrorCode::ZeroProbabilitySequence: return "ZeroProbabilitySequence";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::EventSpaceTooLarge: return "EventSpaceTooLarge";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::DegenerateMoments: return "DegenerateMoments";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::SequenceSpaceTooLarge: return "SequenceSpaceTooLarge";
    case ErrorCode::OracleMismatch: return "OracleMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace rrhmm
