// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

// CSV ingestion: stationarity transforms (FRED-MD codes), block aggregation,
// in-sample normalization and a writer for SeriesSet.

#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "onlasso/arx.hpp"

namespace onlasso {

/// 1 level, 2 first difference, 3 second difference, 4 log, 5 first
/// difference of log, 6 second difference of log, 7 first difference of the
/// growth rate x_t / x_{t-1} - 1.
enum class TransformCode : int {
  Level = 1,
  Diff = 2,
  Diff2 = 3,
  Log = 4,
  DiffLog = 5,
  Diff2Log = 6,
  DiffGrowth = 7,
};

/// Throws ParseError unless code is in 1..7.
TransformCode transform_code(int code);

/// Observations lost at the start of the series.
int transform_lag(TransformCode code);

/// Output is shorter by transform_lag(code). Log codes throw NonPositiveForLog;
/// a zero denominator under code 7 throws NonFinite.
std::vector<double> apply_transform(std::span<const double> x, TransformCode code);

struct Normalized {
  std::vector<double> values;
  double mean = 0.0;
  double sd = 1.0;
};

/// (x - mean) / sd with mean and sd (denominator n - 1) taken from the first
/// `training` values only. training = 0 uses the whole series.
Normalized normalize(std::span<const double> x, std::size_t training = 0);

/// Normalizes the target and every exogenous series in place.
void normalize_series(SeriesSet& series, Index training);

enum class ColumnRole { Target, Exogenous, Ignore };

struct CsvSpec {
  std::string target;                     // empty: first data column
  std::vector<std::string> exogenous;     // empty: every other column
  std::vector<std::string> ignore;
  std::map<std::string, int> transforms;  // overrides the file's code row
  int aggregate = 1;                      // mean over blocks of this many rows
};

struct CsvTable {
  std::vector<std::string> names;  // data columns, time index excluded
  std::vector<std::string> time;
  std::vector<int> codes;          // one per data column, 1 when absent
  bool has_codes = false;
  // Column-major; NaN marks a leading missing cell.
  std::vector<std::vector<double>> columns;
};

/// Parses header, optional code row (first cell empty, "transform" or
/// "tcode", case-insensitive, optional trailing colon) and numeric rows.
/// Leading empty cells in a column are allowed; any other empty or
/// non-numeric cell is a ParseError naming the line and column.
CsvTable parse_csv(std::istream& in);

/// Selects, aggregates, transforms and left-trims to a common start.
SeriesSet table_to_series(const CsvTable& table, const CsvSpec& spec = {});

SeriesSet load_csv(const std::filesystem::path& path, const CsvSpec& spec = {});

/// Header "t,<labels>", time index 1..T, shortest round-trip number format.
void write_csv(std::ostream& out, const SeriesSet& series);
void write_csv(const std::filesystem::path& path, const SeriesSet& series);

}  // namespace onlasso
