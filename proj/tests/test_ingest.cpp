// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "onlasso/datagen.hpp"
#include "onlasso/errors.hpp"
#include "onlasso/ingest.hpp"

using namespace onlasso;

namespace {

const std::filesystem::path kFixture =
    std::filesystem::path(ONLASSO_TEST_DATA_DIR) / "monthly_fixture.csv";

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

SeriesSet ingest(const std::string& text, const CsvSpec& spec = {}) {
  return table_to_series(parse(text), spec);
}

template <typename F>
ErrorKind kind_of(F&& f, std::string* what = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "no onlasso::Error thrown";
  return ErrorKind::InvalidArgument;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("onlasso_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
          name);
}

}  // namespace

TEST(Transform, Examples) {
  const double e = std::exp(1.0);
  EXPECT_EQ(apply_transform(std::vector{1.0, 3.0, 6.0}, TransformCode::Diff),
            (std::vector{2.0, 3.0}));
  const auto dl = apply_transform(std::vector{1.0, e}, TransformCode::DiffLog);
  ASSERT_EQ(dl.size(), 1u);
  EXPECT_NEAR(dl[0], 1.0, 1e-15);
  const auto d2l = apply_transform(std::vector{1.0, e, e * e * e}, TransformCode::Diff2Log);
  ASSERT_EQ(d2l.size(), 1u);
  EXPECT_NEAR(d2l[0], 1.0, 1e-14);
}

TEST(Transform, RemainingCodesByHand) {
  const std::vector<double> x{2.0, 4.0, 5.0, 10.0};
  EXPECT_EQ(apply_transform(x, TransformCode::Level), x);
  EXPECT_EQ(apply_transform(x, TransformCode::Diff2), (std::vector{-1.0, 4.0}));
  const auto lg = apply_transform(x, TransformCode::Log);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(lg[i], std::log(x[i]));
  // Growth rates 1, 0.25, 1; differences -0.75, 0.75.
  const auto g = apply_transform(x, TransformCode::DiffGrowth);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g[0], -0.75, 1e-15);
  EXPECT_NEAR(g[1], 0.75, 1e-15);
  for (int c = 1; c <= 7; ++c) {
    const TransformCode code = transform_code(c);
    EXPECT_EQ(apply_transform(x, code).size(), x.size() - static_cast<std::size_t>(transform_lag(code)));
  }
}

TEST(Transform, Errors) {
  EXPECT_EQ(kind_of([] { apply_transform(std::vector{1.0, 0.0}, TransformCode::Log); }),
            ErrorKind::NonPositiveForLog);
  EXPECT_EQ(kind_of([] { apply_transform(std::vector{1.0, -2.0, 3.0}, TransformCode::DiffLog); }),
            ErrorKind::NonPositiveForLog);
  EXPECT_EQ(kind_of([] { apply_transform(std::vector{0.0, 1.0, 2.0}, TransformCode::DiffGrowth); }),
            ErrorKind::NonFinite);
  EXPECT_EQ(kind_of([] { apply_transform(std::vector{1.0, 2.0}, TransformCode::Diff2); }),
            ErrorKind::SeriesTooShort);
  EXPECT_EQ(kind_of([] { transform_code(0); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { transform_code(8); }), ErrorKind::ParseError);
  // Level data may be non-positive.
  EXPECT_NO_THROW(apply_transform(std::vector{-1.0, 0.0}, TransformCode::Diff));
}

TEST(Normalize, Examples) {
  const Normalized z = normalize(std::vector{1.0, 2.0, 3.0});
  EXPECT_EQ(z.values, (std::vector{-1.0, 0.0, 1.0}));
  EXPECT_EQ(z.mean, 2.0);
  EXPECT_EQ(z.sd, 1.0);

  const std::vector<double> raw{0.3, -1.2, 2.5, 0.7, -0.1, 1.9};
  const Normalized once = normalize(raw);
  const Normalized twice = normalize(once.values);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(twice.values[i], once.values[i], 1e-12);
  EXPECT_NEAR(twice.mean, 0.0, 1e-12);
  EXPECT_NEAR(twice.sd, 1.0, 1e-12);

  EXPECT_EQ(kind_of([] { normalize(std::vector{4.0, 4.0, 4.0}); }), ErrorKind::ConstantSeries);
  EXPECT_EQ(kind_of([] { normalize(std::vector{4.0}); }), ErrorKind::ConstantSeries);
  EXPECT_EQ(kind_of([] { normalize(std::vector{1.0, 2.0}, 3); }), ErrorKind::InvalidArgument);
}

TEST(Normalize, UsesTrainingStatisticsOnly) {
  std::vector<double> a{1.0, 2.0, 3.0, 10.0, -4.0};
  std::vector<double> b{1.0, 2.0, 3.0, 500.0, 7.0};
  const Normalized za = normalize(a, 3);
  const Normalized zb = normalize(b, 3);
  EXPECT_EQ(za.mean, zb.mean);
  EXPECT_EQ(za.sd, zb.sd);
  EXPECT_EQ(za.values[3], 8.0);
  EXPECT_EQ(zb.values[4], 5.0);

  SeriesSet s;
  s.y = Eigen::Vector3d(1.0, 2.0, 3.0);
  s.x = Eigen::MatrixXd(3, 1);
  s.x << 4.0, 4.0, 7.0;
  s.labels = {"y", "flat"};
  SeriesSet t = s;
  normalize_series(t, 3);
  EXPECT_EQ(t.y, Eigen::Vector3d(-1.0, 0.0, 1.0));
  std::string what;
  EXPECT_EQ(kind_of([&] { normalize_series(s, 2); }, &what), ErrorKind::ConstantSeries);
  EXPECT_NE(what.find("'flat'"), std::string::npos) << what;
}

TEST(ParseCsv, IdentityIngestion) {
  const SeriesSet s = ingest("t,a,b\n,1,1\n1,0.5,2\n2,-1.5,3\n3,2.25,4\n");
  ASSERT_EQ(s.length(), 3);
  ASSERT_EQ(s.exogenous(), 1);
  EXPECT_EQ(s.y, Eigen::Vector3d(0.5, -1.5, 2.25));
  EXPECT_EQ(s.x.col(0), Eigen::Vector3d(2.0, 3.0, 4.0));
  EXPECT_EQ(s.labels, (std::vector<std::string>{"a", "b"}));
}

TEST(ParseCsv, CodeRowDetection) {
  for (const char* head : {"", "transform", "Transform:", "TCODE"}) {
    const CsvTable t = parse(std::string("date,a,b\n") + head + ",5,2\n1,1,1\n2,2,2\n");
    EXPECT_TRUE(t.has_codes) << head;
    EXPECT_EQ(t.codes, (std::vector{5, 2})) << head;
    EXPECT_EQ(t.time.size(), 2u);
  }
  const CsvTable plain = parse("date,a\n1,5\n2,6\n");
  EXPECT_FALSE(plain.has_codes);
  EXPECT_EQ(plain.codes, (std::vector{1}));
  EXPECT_EQ(plain.columns[0], (std::vector{5.0, 6.0}));
  // Quoted fields, CRLF line endings and blank lines.
  const CsvTable q = parse("\"date\",\"a, b\"\r\n\r\n\"2001-01\",\"3.5\"\r\n");
  EXPECT_EQ(q.names, (std::vector<std::string>{"a, b"}));
  EXPECT_EQ(q.columns[0], (std::vector{3.5}));
}

TEST(ParseCsv, ErrorsNameTheCell) {
  std::string what;
  EXPECT_EQ(kind_of([] { parse("t,a,b\n1,2,3\n2,4,abc\n"); }, &what), ErrorKind::ParseError);
  EXPECT_NE(what.find("line 3, column 'b'"), std::string::npos) << what;
  EXPECT_NE(what.find("'abc'"), std::string::npos) << what;

  EXPECT_EQ(kind_of([] { parse("t,a\n1,2\n2,\n"); }, &what), ErrorKind::ParseError);
  EXPECT_NE(what.find("line 3, column 'a': missing value"), std::string::npos) << what;

  EXPECT_EQ(kind_of([] { parse("t,a\n1,inf\n"); }, &what), ErrorKind::NonFinite);
  EXPECT_NE(what.find("line 2, column 'a'"), std::string::npos) << what;

  EXPECT_EQ(kind_of([] { parse("t,a,b\n1,2\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("t,a,b\ntcode,1,9\n1,2,3\n"); }, &what), ErrorKind::ParseError);
  EXPECT_NE(what.find("column 'b'"), std::string::npos) << what;
  EXPECT_EQ(kind_of([] { parse("t,a,b\n,1,x\n1,2,3\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("t,a,a\n1,2,3\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("t\n1\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("t,a\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse(""); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse("t,a\n1,\"2\n"); }), ErrorKind::ParseError);
}

TEST(TableToSeries, ColumnSelection) {
  const std::string text = "t,a,b,c\n1,1,10,100\n2,2,20,200\n3,3,30,300\n";
  CsvSpec spec;
  spec.target = "b";
  spec.ignore = {"a"};
  SeriesSet s = ingest(text, spec);
  EXPECT_EQ(s.labels, (std::vector<std::string>{"b", "c"}));
  EXPECT_EQ(s.y, Eigen::Vector3d(10, 20, 30));

  spec = {};
  spec.target = "c";
  spec.exogenous = {"a"};
  s = ingest(text, spec);
  EXPECT_EQ(s.labels, (std::vector<std::string>{"c", "a"}));

  spec = {};
  spec.target = "z";
  EXPECT_EQ(kind_of([&] { ingest(text, spec); }), ErrorKind::MissingColumn);
  spec = {};
  spec.ignore = {"nope"};
  EXPECT_EQ(kind_of([&] { ingest(text, spec); }), ErrorKind::MissingColumn);
  spec = {};
  spec.transforms = {{"nope", 2}};
  EXPECT_EQ(kind_of([&] { ingest(text, spec); }), ErrorKind::MissingColumn);
  spec = {};
  spec.exogenous = {"a"};
  EXPECT_EQ(kind_of([&] { ingest(text, spec); }), ErrorKind::InvalidArgument);
  spec = {};
  spec.aggregate = 0;
  EXPECT_EQ(kind_of([&] { ingest(text, spec); }), ErrorKind::InvalidArgument);
}

TEST(TableToSeries, TransformsAndLeftTrim) {
  // a: Diff (loses 1). b: starts one row late, level. c: Diff2 (loses 2).
  const std::string text =
      "t,a,b,c\n"
      ",2,1,3\n"
      "1,1,,1\n"
      "2,4,7,4\n"
      "3,9,8,9\n"
      "4,16,9,16\n";
  const SeriesSet s = ingest(text);
  ASSERT_EQ(s.length(), 2);
  EXPECT_EQ(s.y, Eigen::Vector2d(5, 7));          // diffs 3, 5, 7 trimmed to last two
  EXPECT_EQ(s.x.col(0), Eigen::Vector2d(8, 9));   // level from row 3
  EXPECT_EQ(s.x.col(1), Eigen::Vector2d(2, 2));   // second diffs of squares

  CsvSpec spec;
  spec.transforms = {{"c", 1}};
  const SeriesSet o = ingest(text, spec);
  EXPECT_EQ(o.length(), 3);
  EXPECT_EQ(o.x.col(1), Eigen::Vector3d(4, 9, 16));

  EXPECT_EQ(kind_of([] { ingest("t,a,b\n,1,4\n1,1,1\n2,2,-2\n"); }),
            ErrorKind::NonPositiveForLog);
  EXPECT_EQ(kind_of([] { ingest("t,a,b\n1,1,\n2,2,\n"); }), ErrorKind::SeriesTooShort);
}

TEST(TableToSeries, AggregationByHand) {
  // Two complete quarters and one trailing month, which is dropped.
  const std::string text =
      "t,a,b\n"
      "m1,1,\n"
      "m2,2,5\n"
      "m3,6,6\n"
      "m4,3,7\n"
      "m5,3,8\n"
      "m6,6,9\n"
      "m7,7,10\n"
      "m8,9,11\n"
      "m9,11,12\n"
      "m10,50,13\n";
  CsvSpec spec;
  spec.aggregate = 3;
  const SeriesSet s = ingest(text, spec);
  // b's first quarter is incomplete, so both series start at quarter 2.
  ASSERT_EQ(s.length(), 2);
  EXPECT_EQ(s.y, Eigen::Vector2d(4, 9));
  EXPECT_EQ(s.x.col(0), Eigen::Vector2d(8, 11));
}

TEST(LoadCsv, FixtureQuarterly) {
  CsvSpec spec;
  spec.aggregate = 3;
  const SeriesSet s = load_csv(kFixture, spec);

  std::ifstream in(kFixture);
  const CsvTable raw = parse_csv(in);
  ASSERT_EQ(raw.names, (std::vector<std::string>{"indpro", "unrate", "spread"}));
  ASSERT_EQ(raw.codes, (std::vector{5, 2, 1}));
  ASSERT_EQ(raw.time.size(), 180u);

  // 60 quarters; spread's first observation is month 5, so its first full
  // quarter is the third, which also covers both one-lag transforms.
  ASSERT_EQ(s.length(), 58);
  ASSERT_EQ(s.exogenous(), 2);
  auto quarter = [&](std::size_t col, std::size_t q) {
    const auto& c = raw.columns[col];
    return (c[3 * q] + c[3 * q + 1] + c[3 * q + 2]) / 3.0;
  };
  for (std::size_t i = 0; i < 58; ++i) {
    const std::size_t q = i + 2;
    const auto t = static_cast<Index>(i);
    EXPECT_NEAR(s.y(t), std::log(quarter(0, q)) - std::log(quarter(0, q - 1)), 1e-13);
    EXPECT_NEAR(s.x(t, 0), quarter(1, q) - quarter(1, q - 1), 1e-13);
    EXPECT_NEAR(s.x(t, 1), quarter(2, q), 1e-13);
  }
}

TEST(LoadCsv, FixtureMonthlyAndMissingFile) {
  const SeriesSet s = load_csv(kFixture);
  EXPECT_EQ(s.length(), 176);  // spread starts at month 5
  EXPECT_EQ(s.labels.front(), "indpro");
  std::string what;
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/file.csv"); }, &what),
            ErrorKind::InvalidArgument);
  CsvSpec spec;
  spec.target = "gdp";
  EXPECT_EQ(kind_of([&] { load_csv(kFixture, spec); }, &what), ErrorKind::MissingColumn);
  EXPECT_NE(what.find("monthly_fixture.csv"), std::string::npos) << what;
}

TEST(WriteCsv, RoundTrip) {
  SimConfig cfg;
  cfg.k = 4;
  cfg.p = 2;
  cfg.s = 2;
  cfg.T = 80;
  cfg.seed = 9;
  const SeriesSet s = simulate_arx(cfg).first;
  const auto path = temp_path("roundtrip.csv");
  write_csv(path, s);
  const SeriesSet back = load_csv(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.length(), s.length());
  ASSERT_EQ(back.exogenous(), s.exogenous());
  EXPECT_EQ(back.labels, s.labels);
  EXPECT_LE((back.y - s.y).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((back.x - s.x).cwiseAbs().maxCoeff(), 1e-12);

  SeriesSet bad = s;
  bad.labels[1] = "x,1";
  std::ostringstream os;
  EXPECT_EQ(kind_of([&] { write_csv(os, bad); }), ErrorKind::InvalidArgument);
}

TEST(LoadCsv, WideFileGives1068Features) {
  // Target plus 88 predictors with twelve lags each.
  SimConfig cfg;
  cfg.k = 88;
  cfg.p = 12;
  cfg.s = 12;
  cfg.T = 60;
  cfg.density = 0.01;
  cfg.seed = 4;
  const SeriesSet s = simulate_arx(cfg).first;
  const auto path = temp_path("wide.csv");
  write_csv(path, s);
  const SeriesSet back = load_csv(path);
  std::filesystem::remove(path);
  ASSERT_EQ(back.exogenous(), 88);
  const LaggedDesign d = build_lag_design(back, 12, 12);
  EXPECT_EQ(d.features(), 1068);
  EXPECT_EQ(d.rows(), 60 - 12);
}
