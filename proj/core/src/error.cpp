#include "dntk/error.hpp"

namespace dntk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BadEps: return "BadEps";
    case ErrorCode::BadLambda: return "BadLambda";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::STooLarge: return "STooLarge";
    case ErrorCode::HTooLarge: return "HTooLarge";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::ClassOutOfRange: return "ClassOutOfRange";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonOrthonormalBasis: return "NonOrthonormalBasis";
    case ErrorCode::NotAProjector: return "NotAProjector";
    case ErrorCode::ScaleMismatch: return "ScaleMismatch";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::NotSmooth: return "NotSmooth";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::ZeroTrace: return "ZeroTrace";
    case ErrorCode::ZeroScores: return "ZeroScores";
    case ErrorCode::ZeroGradient: return "ZeroGradient";
    case ErrorCode::RankZeroCluster: return "RankZeroCluster";
    case ErrorCode::DisconnectedDegenerate: return "DisconnectedDegenerate";
    case ErrorCode::DegenerateInducing: return "DegenerateInducing";
    case ErrorCode::CheckFailed: return "CheckFailed";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite:
    case ErrorCode::SingularSystem:
    case ErrorCode::Divergence:
    case ErrorCode::ZeroTrace:
    case ErrorCode::ZeroScores:
    case ErrorCode::ZeroGradient:
    case ErrorCode::RankZeroCluster:
    case ErrorCode::DisconnectedDegenerate:
    case ErrorCode::DegenerateInducing:
    case ErrorCode::CheckFailed:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace dntk
