#include "error.hpp"

namespace lfa {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparseableField: return "UnparseableField";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::AllRemoved: return "AllRemoved";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonfiniteLoss: return "NonfiniteLoss";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::BadBudget: return "BadBudget";
    case ErrorCode::CycleLimit: return "CycleLimit";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
  }
  return "Unknown";
}

}  // namespace lfa
