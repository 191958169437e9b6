#include "lmf/errors.hpp"

namespace lmf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDatapoint: return "EmptyDatapoint";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::OutsideLmfRegime: return "OutsideLmfRegime";
    case ErrorCode::EmptyTrader: return "EmptyTrader";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::LagOutOfRange: return "LagOutOfRange";
    case ErrorCode::NoPowerLawRegion: return "NoPowerLawRegion";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::FitDiverged: return "FitDiverged";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NoLrcDetected: return "NoLrcDetected";
    case ErrorCode::CellUnusable: return "CellUnusable";
    case ErrorCode::OutOfCalibration: return "OutOfCalibration";
    case ErrorCode::InvalidPrefactor: return "InvalidPrefactor";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NothingToPlot: return "NothingToPlot";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lmf
