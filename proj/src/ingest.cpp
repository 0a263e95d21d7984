// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <boost/tokenizer.hpp>

#include "onlasso/errors.hpp"

namespace onlasso {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_fields(const std::string& line, std::size_t line_no) {
  using Sep = boost::escaped_list_separator<char>;
  bool open = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\') {
      ++i;
    } else if (line[i] == '"') {
      open = !open;
    }
  }
  if (open) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": unterminated quote");
  }
  try {
    boost::tokenizer<Sep> tok(line, Sep('\\', ',', '"'));
    std::vector<std::string> out;
    for (const auto& f : tok) out.push_back(trim(f));
    return out;
  } catch (const boost::escaped_list_error& e) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line_no) + ": " + std::string(e.what()));
  }
}

bool is_code_row(const std::vector<std::string>& fields) {
  std::string head = lower(fields.front());
  if (!head.empty() && head.back() == ':') head.pop_back();
  return head.empty() || head == "transform" || head == "tcode";
}

std::string cell_name(std::size_t line_no, const std::string& column) {
  return "line " + std::to_string(line_no) + ", column '" + column + "'";
}

std::vector<double> diff(const std::vector<double>& x) {
  std::vector<double> d;
  d.reserve(x.size() > 0 ? x.size() - 1 : 0);
  for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
  return d;
}

std::vector<double> logs(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) {
      throw Error(ErrorKind::NonPositiveForLog,
                  "value " + std::to_string(x[i]) + " at position " + std::to_string(i + 1));
    }
    out[i] = std::log(x[i]);
  }
  return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::vector<double> aggregate(const std::vector<double>& x, int block) {
  std::vector<double> out;
  const std::size_t b = static_cast<std::size_t>(block);
  for (std::size_t start = 0; start + b <= x.size(); start += b) {
    double sum = 0.0;
    for (std::size_t i = start; i < start + b; ++i) sum += x[i];  // NaN propagates
    out.push_back(sum / static_cast<double>(b));
  }
  return out;
}

}  // namespace

TransformCode transform_code(int code) {
  if (code < 1 || code > 7) {
    throw Error(ErrorKind::ParseError, "transform code " + std::to_string(code) +
                                           " outside 1..7");
  }
  return static_cast<TransformCode>(code);
}

int transform_lag(TransformCode code) {
  switch (code) {
    case TransformCode::Level:
    case TransformCode::Log: return 0;
    case TransformCode::Diff:
    case TransformCode::DiffLog: return 1;
    case TransformCode::Diff2:
    case TransformCode::Diff2Log:
    case TransformCode::DiffGrowth: return 2;
  }
  return 0;
}

std::vector<double> apply_transform(std::span<const double> x, TransformCode code) {
  const auto lag = static_cast<std::size_t>(transform_lag(code));
  if (x.size() <= lag) {
    throw Error(ErrorKind::SeriesTooShort, std::to_string(x.size()) +
                                               " values for a transform dropping " +
                                               std::to_string(lag));
  }
  switch (code) {
    case TransformCode::Level: return {x.begin(), x.end()};
    case TransformCode::Diff: return diff({x.begin(), x.end()});
    case TransformCode::Diff2: return diff(diff({x.begin(), x.end()}));
    case TransformCode::Log: return logs(x);
    case TransformCode::DiffLog: return diff(logs(x));
    case TransformCode::Diff2Log: return diff(diff(logs(x)));
    case TransformCode::DiffGrowth: {
      std::vector<double> growth;
      for (std::size_t i = 1; i < x.size(); ++i) {
        if (x[i - 1] == 0.0) {
          throw Error(ErrorKind::NonFinite,
                      "growth rate undefined at position " + std::to_string(i + 1));
        }
        growth.push_back(x[i] / x[i - 1] - 1.0);
      }
      return diff(growth);
    }
  }
  return {};
}

Normalized normalize(std::span<const double> x, std::size_t training) {
  const std::size_t n = training == 0 ? x.size() : training;
  if (n > x.size()) {
    throw Error(ErrorKind::InvalidArgument, "training length " + std::to_string(n) +
                                                " exceeds series length " +
                                                std::to_string(x.size()));
  }
  if (n < 2) throw Error(ErrorKind::ConstantSeries, "need two values for a standard deviation");
  Normalized out;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i];
  out.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) ss += (x[i] - out.mean) * (x[i] - out.mean);
  out.sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(out.sd > 0.0)) throw Error(ErrorKind::ConstantSeries, "zero variance in training sample");
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out.values[i] = (x[i] - out.mean) / out.sd;
  return out;
}

void normalize_series(SeriesSet& series, Index training) {
  const auto n = static_cast<std::size_t>(training);
  auto apply = [&](auto&& col, const std::string& label) {
    std::vector<double> v(col.begin(), col.end());
    try {
      const Normalized z = normalize(v, n);
      for (Index i = 0; i < col.size(); ++i) col(i) = z.values[static_cast<std::size_t>(i)];
    } catch (const Error& e) {
      throw e.in_context("series '" + label + "'");
    }
  };
  auto label = [&](std::size_t i) {
    return i < series.labels.size() ? series.labels[i] : std::to_string(i);
  };
  apply(series.y, label(0));
  for (Index j = 0; j < series.x.cols(); ++j) {
    apply(series.x.col(j), label(static_cast<std::size_t>(j) + 1));
  }
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  std::vector<bool> started;
  bool header_done = false;
  bool first_body_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_fields(line, line_no);

    if (!header_done) {
      if (fields.size() < 2) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) +
                                               ": header needs a time column and a series");
      }
      std::set<std::string> seen;
      for (std::size_t j = 1; j < fields.size(); ++j) {
        if (fields[j].empty() || !seen.insert(fields[j]).second) {
          throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) +
                                                 ": empty or duplicate column name '" +
                                                 fields[j] + "'");
        }
        table.names.push_back(fields[j]);
      }
      table.codes.assign(table.names.size(), 1);
      table.columns.resize(table.names.size());
      started.assign(table.names.size(), false);
      header_done = true;
      continue;
    }

    if (fields.size() != table.names.size() + 1) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(table.names.size() + 1) +
                                             " fields, found " + std::to_string(fields.size()));
    }

    if (first_body_line && is_code_row(fields)) {
      first_body_line = false;
      table.has_codes = true;
      for (std::size_t j = 0; j < table.names.size(); ++j) {
        const std::string& cell = fields[j + 1];
        if (cell.empty()) continue;
        int code = 0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), code);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
          throw Error(ErrorKind::ParseError, cell_name(line_no, table.names[j]) +
                                                 ": transform code '" + cell +
                                                 "' is not an integer");
        }
        try {
          transform_code(code);
        } catch (const Error& e) {
          throw e.in_context(cell_name(line_no, table.names[j]));
        }
        table.codes[j] = code;
      }
      continue;
    }
    first_body_line = false;

    table.time.push_back(fields[0]);
    for (std::size_t j = 0; j < table.names.size(); ++j) {
      const std::string& cell = fields[j + 1];
      if (cell.empty()) {
        if (started[j]) {
          throw Error(ErrorKind::ParseError,
                      cell_name(line_no, table.names[j]) + ": missing value");
        }
        table.columns[j].push_back(kMissing);
        continue;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::ParseError,
                    cell_name(line_no, table.names[j]) + ": cannot parse '" + cell + "'");
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NonFinite,
                    cell_name(line_no, table.names[j]) + ": value '" + cell + "'");
      }
      started[j] = true;
      table.columns[j].push_back(v);
    }
  }
  if (!header_done) throw Error(ErrorKind::ParseError, "empty file");
  if (table.time.empty()) throw Error(ErrorKind::ParseError, "no data rows");
  return table;
}

SeriesSet table_to_series(const CsvTable& table, const CsvSpec& spec) {
  if (spec.aggregate < 1) throw Error(ErrorKind::InvalidArgument, "aggregate must be >= 1");
  auto require = [&](const std::string& name) {
    if (!contains(table.names, name)) {
      throw Error(ErrorKind::MissingColumn, "no column named '" + name + "'");
    }
  };
  const std::string target = spec.target.empty() ? table.names.front() : spec.target;
  require(target);
  for (const auto& n : spec.ignore) require(n);
  for (const auto& [n, code] : spec.transforms) require(n);
  if (contains(spec.ignore, target)) {
    throw Error(ErrorKind::InvalidArgument, "target '" + target + "' is also ignored");
  }

  std::vector<std::string> exo;
  if (spec.exogenous.empty()) {
    for (const auto& n : table.names)
      if (n != target && !contains(spec.ignore, n)) exo.push_back(n);
  } else {
    for (const auto& n : spec.exogenous) {
      require(n);
      if (n == target || contains(spec.ignore, n)) {
        throw Error(ErrorKind::InvalidArgument,
                    "column '" + n + "' cannot be both exogenous and target or ignored");
      }
      exo.push_back(n);
    }
  }

  std::vector<std::string> selected{target};
  selected.insert(selected.end(), exo.begin(), exo.end());

  // Transformed values with the (aggregated) row index of their first entry.
  std::vector<std::vector<double>> values;
  std::vector<std::size_t> starts;
  for (const auto& name : selected) {
    const auto j = static_cast<std::size_t>(
        std::find(table.names.begin(), table.names.end(), name) - table.names.begin());
    const auto it = spec.transforms.find(name);
    const TransformCode code = transform_code(it != spec.transforms.end() ? it->second
                                                                          : table.codes[j]);
    const std::vector<double> col = aggregate(table.columns[j], spec.aggregate);
    std::size_t first = 0;
    while (first < col.size() && std::isnan(col[first])) ++first;
    try {
      if (first == col.size()) throw Error(ErrorKind::SeriesTooShort, "no observations");
      values.push_back(apply_transform(std::span(col).subspan(first), code));
    } catch (const Error& e) {
      throw e.in_context("column '" + name + "'");
    }
    starts.push_back(first + static_cast<std::size_t>(transform_lag(code)));
  }

  const std::size_t rows = table.columns.front().size() / static_cast<std::size_t>(spec.aggregate);
  const std::size_t common = *std::max_element(starts.begin(), starts.end());
  if (common >= rows) {
    throw Error(ErrorKind::SeriesTooShort, "no period where every selected column is observed");
  }
  const auto T = static_cast<Index>(rows - common);

  SeriesSet s;
  s.y.resize(T);
  s.x.resize(T, static_cast<Index>(exo.size()));
  s.labels = selected;
  for (std::size_t c = 0; c < selected.size(); ++c) {
    const std::size_t offset = common - starts[c];
    for (Index t = 0; t < T; ++t) {
      const double v = values[c][offset + static_cast<std::size_t>(t)];
      if (c == 0) {
        s.y(t) = v;
      } else {
        s.x(t, static_cast<Index>(c) - 1) = v;
      }
    }
  }
  s.validate();
  return s;
}

SeriesSet load_csv(const std::filesystem::path& path, const CsvSpec& spec) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path.string() + "'");
  try {
    return table_to_series(parse_csv(in), spec);
  } catch (const Error& e) {
    throw e.in_context(path.string());
  }
}

void write_csv(std::ostream& out, const SeriesSet& series) {
  series.validate();
  std::vector<std::string> labels = series.labels;
  if (labels.size() != static_cast<std::size_t>(series.exogenous()) + 1) {
    labels = {"y"};
    for (Index j = 0; j < series.exogenous(); ++j) labels.push_back("x" + std::to_string(j + 1));
  }
  for (const auto& l : labels) {
    if (l.find_first_of(",\"\\\n\r") != std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "label '" + l + "' needs quoting");
    }
  }
  out << 't';
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf));
  };
  for (Index t = 0; t < series.length(); ++t) {
    out << (t + 1);
    put(series.y(t));
    for (Index j = 0; j < series.exogenous(); ++j) put(series.x(t, j));
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const SeriesSet& series) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
  write_csv(out, series);
  if (!out) throw Error(ErrorKind::InvalidArgument, "write to '" + path.string() + "' failed");
}

}  // namespace onlasso
