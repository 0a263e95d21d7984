// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

// Penalty selection: rolling validation over a fixed grid, its rolling-window
// variant, and online log-lambda updates (gradient and Newton) driven by
// RecLasso. Times are 1-based; an origin t forecasts y_{t+1} from data
// through t.

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "onlasso/arx.hpp"
#include "onlasso/homotopy.hpp"

namespace onlasso {

struct SplitConfig {
  Index T1 = 0;
  Index T2 = 0;

  /// floor(T/3), floor(2T/3).
  static SplitConfig thirds(Index T);
  /// T2 = floor(2T/3) and T1 = T2 - train_len.
  static SplitConfig with_training_length(Index T, Index train_len);

  /// first_index < T1 < T2 <= T, else InvalidArgument.
  void validate(const LaggedDesign& design) const;
};

/// Strictly decreasing, strictly positive penalties.
struct PenaltyGrid {
  std::vector<double> values;

  Index size() const noexcept { return static_cast<Index>(values.size()); }
  /// Sorts decreasing and rejects non-positive or repeated values.
  static PenaltyGrid from_values(std::vector<double> values);
};

/// n points log-spaced from lambda_max down to 1e-3 lambda_max.
PenaltyGrid default_grid(const CrossProducts& xp, Index n = 50);
/// Grid for the rows of the design with response time <= through.
PenaltyGrid default_grid_through(const LaggedDesign& design, Index through,
                                 Index n = 50);
PenaltyGrid default_grid(const LaggedDesign& design, Index n = 50);

enum class Execution { Serial, Parallel };

/// One-step forecasts of every grid penalty for origins [t_begin, t_end).
/// Each lambda keeps its own solution path, warm-started by RecLasso, on a
/// shared set of cross products.
struct GridPaths {
  Index t_begin = 0;
  Eigen::MatrixXd forecast;  // grid x origins
  Eigen::MatrixXd sq_error;  // +inf once a lambda-thread has failed
  Eigen::VectorXd actual;
  std::vector<int> fallbacks;
  std::vector<bool> failed;

  Index origins() const noexcept { return actual.size(); }
};

GridPaths grid_error_paths(const LaggedDesign& design, const PenaltyGrid& grid,
                           Index t_begin, Index t_end,
                           Execution exec = Execution::Parallel,
                           const HomotopyOptions& opts = {});

struct ValidationResult {
  double lambda = 0.0;
  Index index = 0;
  Eigen::VectorXd msfe;  // per grid point, +inf for failed threads
};

/// Argmin of the mean squared error; ties go to the larger penalty.
Index argmin_msfe(const Eigen::Ref<const Eigen::VectorXd>& msfe);

/// Rolling validation over origins T1, ..., T2 - 1.
ValidationResult rolling_validate(const LaggedDesign& design, const PenaltyGrid& grid,
                                  const SplitConfig& split,
                                  Execution exec = Execution::Parallel,
                                  const HomotopyOptions& opts = {});

struct Observation {
  double y = 0.0;
  Eigen::VectorXd z;
};

/// Observation whose response is y_t.
Observation observation_at(const LaggedDesign& design, Index t);

/// (y - z'Phi)^2.
double prediction_error(const ActiveModel& model, const Observation& obs);

/// d err / d log(lambda) = -2 lambda (z_A' G_A^{-1} v_A)(z_A' Phi_A - y) at
/// the current active set.
double grad_log_lambda(const ActiveModel& model, const Observation& obs);

/// Sigma(lambda) = G_A^{-1}(Z_A'y - 2 lambda v_A).
Eigen::VectorXd newton_sigma(const ActiveModel& model);

constexpr double kMaxLogStep = 1.0;
constexpr double kHessianGuard = 1e-10;

/// lambda * exp(-eta * grad), log-step clamped to kMaxLogStep.
double gradient_update(double lambda, double grad, double eta);

struct NewtonStep {
  double lambda = 0.0;
  bool skipped = false;
};

/// lambda * exp((z'Phi - y) / (z'Sigma - y)), log-step clamped. Skipped when
/// |z'Sigma - y| <= kHessianGuard or when the step would not descend.
NewtonStep newton_update(const ActiveModel& model, const Observation& obs);

enum class Method { Static, RollingWindow, OnlineGradient, OnlineNewton };

std::string_view method_name(Method m);

struct TrajectoryEntry {
  Index t = 0;  // forecast origin
  double lambda = 0.0;
  double forecast = 0.0;
  double actual = 0.0;
  double sq_error = 0.0;
  bool fallback = false;
  bool skipped = false;
  // Ordering instrumentation: values of a per-run counter taken when the
  // error was recorded and when the penalty update ran.
  std::uint64_t error_seq = 0;
  std::uint64_t update_seq = 0;
};

struct PenaltyTrajectory {
  Method method = Method::Static;
  std::vector<TrajectoryEntry> entries;

  double msfe() const;
  int fallbacks() const;
};

struct OnlineOptions {
  double eta = 0.1;
  HomotopyOptions homotopy;
};

/// Online evaluation for origins [t_begin, t_end): forecast with lambda_t and
/// record the error, update lambda from the same observation, then fold the
/// observation in at the new penalty. Static keeps lambda fixed.
PenaltyTrajectory online_evaluate(const LaggedDesign& design, Method rule,
                                  double lambda_init, Index t_begin, Index t_end,
                                  const OnlineOptions& opts = {});

/// Evaluation period [T2, T) of the split.
PenaltyTrajectory online_evaluate(const LaggedDesign& design, Method rule,
                                  double lambda_init, const SplitConfig& split,
                                  const OnlineOptions& opts = {});

PenaltyTrajectory static_evaluate(const LaggedDesign& design, double lambda,
                                  const SplitConfig& split,
                                  const HomotopyOptions& opts = {});

/// At origin t in [T2, T) the penalty is re-selected on the window of the
/// last T2 - T1 origins, always from the original grid.
PenaltyTrajectory rolling_window_evaluate(const LaggedDesign& design,
                                          const PenaltyGrid& grid,
                                          const SplitConfig& split,
                                          Execution exec = Execution::Parallel,
                                          const HomotopyOptions& opts = {});

}  // namespace onlasso
