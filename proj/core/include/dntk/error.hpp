#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dntk {

enum class ErrorCode {
  // validation
  NotSquare,
  NotSymmetric,
  EmptyInput,
  DimMismatch,
  ShapeMismatch,
  LengthMismatch,
  BadEps,
  BadLambda,
  BadArgument,
  KTooLarge,
  STooLarge,
  HTooLarge,
  RankTooLarge,
  RankMismatch,
  ClassOutOfRange,
  IndexOutOfRange,
  NonOrthonormalBasis,
  NotAProjector,
  ScaleMismatch,
  PreconditionFailed,
  NotSmooth,
  UnknownField,
  ParseError,
  VersionMismatch,
  TruncatedFile,
  IoError,
  UnknownCommand,
  // numerical
  NonFinite,
  SingularSystem,
  Divergence,
  ZeroTrace,
  ZeroScores,
  ZeroGradient,
  RankZeroCluster,
  DisconnectedDegenerate,
  DegenerateInducing,
  CheckFailed,
};

std::string_view to_string(ErrorCode code);

/// Numerical failures map to CLI exit code 2; everything else is a
/// validation failure (exit code 1).
bool is_numerical(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dntk
