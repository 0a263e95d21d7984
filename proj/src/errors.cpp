// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/errors.hpp"

namespace onlasso {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularUpdate: return "SingularUpdate";
    case ErrorKind::DegenerateFeature: return "DegenerateFeature";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PathStalled: return "PathStalled";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DegenerateDesign: return "DegenerateDesign";
    case ErrorKind::RescaleFailed: return "RescaleFailed";
    case ErrorKind::NonPositiveForLog: return "NonPositiveForLog";
    case ErrorKind::ConstantSeries: return "ConstantSeries";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SeriesTooShort:
    case ErrorKind::NonPositiveForLog:
    case ErrorKind::ConstantSeries:
    case ErrorKind::ParseError:
    case ErrorKind::MissingColumn:
    case ErrorKind::NonFinite:
      return ErrorCategory::Data;
    case ErrorKind::InvalidArgument:
      return ErrorCategory::Usage;
    default:
      return ErrorCategory::Numerical;
  }
}

}  // namespace onlasso
