#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lmf {

/// Machine-readable failure reasons. The string form (to_string) is what
/// appears in run logs and in the `flags` column of scatter tables.
enum class ErrorCode {
  EmptyDatapoint,
  InvalidConfig,
  InvalidExponent,
  OutsideLmfRegime,
  EmptyTrader,
  EmptySample,
  InsufficientData,
  DegenerateSample,
  LagOutOfRange,
  NoPowerLawRegion,
  NonPositiveValue,
  FitDiverged,
  SeriesTooShort,
  NoLrcDetected,
  CellUnusable,
  OutOfCalibration,
  InvalidPrefactor,
  ParseError,
  NothingToPlot,
  IoError,
};

std::string_view to_string(ErrorCode code);

class LmfError : public std::runtime_error {
 public:
  LmfError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lmf
