// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

// Forecast comparisons across methods and Monte Carlo replications.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "onlasso/arx.hpp"
#include "onlasso/datagen.hpp"
#include "onlasso/tuning.hpp"

namespace onlasso {

enum class ForecastMethod {
  Static,
  RollingWindow,
  Gradient,
  Newton,
  SampleMean,
  RandomWalk,
  AIC,
  BIC,
};

std::string_view forecast_method_name(ForecastMethod m);
/// Accepts the names above ("static", "rolling-window", "gradient",
/// "newton", "mean", "random-walk", "aic", "bic").
ForecastMethod parse_forecast_method(std::string_view name);
std::vector<ForecastMethod> all_forecast_methods();

/// How T1 and T2 are derived from the series length. Defaults to thirds.
struct SplitRule {
  /// T2 = floor(train_frac * T); T1 = floor(T2 / 2) unless train_len is set.
  std::optional<double> train_frac;
  std::optional<Index> train_len;  // T1 = T2 - train_len
  std::optional<Index> T1;
  std::optional<Index> T2;

  SplitConfig resolve(Index T) const;
};

struct MethodOutcome {
  ForecastMethod method;
  double msfe = 0.0;
  double relative = 0.0;  // msfe / static msfe
  double seconds = 0.0;
  int fallbacks = 0;
  std::vector<double> lambdas;  // penalty trajectory (lasso methods)
  std::vector<double> errors;   // squared one-step errors
  LagOrder order;               // IC methods
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  SplitConfig split;
  double lambda_hat = 0.0;
  Index features = 0;
  std::vector<MethodOutcome> methods;
  bool ordering_ok = true;   // every error recorded before its update
  bool positivity_ok = true; // every penalty > 0
};

struct ComparisonOptions {
  int p = 12;
  int s = 12;
  Index grid_size = 50;
  double eta = 0.1;
  SplitRule split;
  std::vector<ForecastMethod> methods = all_forecast_methods();
  Execution execution = Execution::Parallel;
};

/// Runs every requested method (plus the static baseline) on one data set.
ReplicationResult compare_methods(const SeriesSet& series, const ComparisonOptions& opts,
                                  std::uint64_t seed = 0);

struct TimingSummary {
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;  // ms
  int samples = 0;

  static TimingSummary from_samples(std::vector<double> ms);
};

struct MethodSummary {
  ForecastMethod method;
  double mean_relative = 0.0;
  double se_relative = 0.0;
  double mean_msfe = 0.0;
  TimingSummary timing;
};

struct EvaluationReport {
  std::string source;
  ComparisonOptions options;
  std::vector<ReplicationResult> replications;
  std::vector<MethodSummary> summary;

  bool ordering_ok() const;
  bool positivity_ok() const;
  const MethodSummary& method(ForecastMethod m) const;
};

struct ExperimentConfig {
  SimConfig sim;  // sim.seed is the base seed
  ComparisonOptions comparison;
  int replications = 1;
};

/// Replication r uses seed base + r. Replications run in parallel; the grid
/// inside each replication runs serially in that case.
EvaluationReport run_experiment(const ExperimentConfig& cfg,
                                Execution replications = Execution::Parallel);

/// Single data set (for example a CSV) as a one-replication report.
EvaluationReport evaluate_series(const SeriesSet& series, const ComparisonOptions& opts,
                                 std::string source);

EvaluationReport summarize(std::vector<ReplicationResult> reps, ComparisonOptions opts,
                           std::string source);

struct JsonOptions {
  bool trajectories = true;
  bool timing = false;
};

nlohmann::json report_to_json(const EvaluationReport& report, const JsonOptions& opts = {});
/// method,mean_relative_msfe,se,mean_msfe[,timing columns]
std::string report_to_csv(const EvaluationReport& report, bool timing = false);
std::string report_to_table(const EvaluationReport& report);

struct BenchConfig {
  SimConfig sim;
  int p = 12;
  int s = 12;
  Index grid_size = 50;
  double eta = 0.1;
  SplitRule split;  // bench period is [T1, T2)
  int warmup = 3;
  int iterations = 100;
  Execution execution = Execution::Serial;
};

struct BenchResult {
  SplitConfig split;
  double lambda_start = 0.0;
  TimingSummary rolling;
  TimingSummary gradient;
  TimingSummary newton;
  bool ordering_ok = true;
  bool positivity_ok = true;
};

/// Wall-clock distribution of one full rolling validation over [T1, T2)
/// against each online rule over the same period from the same penalty.
BenchResult bench_timing(const BenchConfig& cfg);

std::string bench_to_table(const BenchResult& r);
nlohmann::json bench_to_json(const BenchResult& r);

}  // namespace onlasso
