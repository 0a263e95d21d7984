// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace onlasso {

/// Broad failure class; the CLI maps it onto its exit code.
enum class ErrorCategory {
  Usage,
  Data,
  Numerical,
};

enum class ErrorKind {
  SingularUpdate,
  DegenerateFeature,
  DimensionMismatch,
  NoConvergence,
  PathStalled,
  SeriesTooShort,
  RankDeficient,
  DegenerateDesign,
  RescaleFailed,
  NonPositiveForLog,
  ConstantSeries,
  ParseError,
  MissingColumn,
  NonFinite,
  InvalidArgument,
};

const char* to_string(ErrorKind kind) noexcept;
ErrorCategory category_of(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

  /// Same kind, message prefixed with "context: ".
  Error in_context(const std::string& context) const {
    return Error(kind_, context + ": " + detail_);
  }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace onlasso
