// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "onlasso/gram_inverse.hpp"

namespace onlasso {

/// Target series y plus k exogenous series (columns of x), aligned in time.
struct SeriesSet {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;                // T x k
  std::vector<std::string> labels;  // target first, then exogenous

  Index length() const noexcept { return y.size(); }
  Index exogenous() const noexcept { return x.cols(); }

  /// Throws DimensionMismatch / NonFinite.
  void validate() const;

  /// First T observations.
  SeriesSet head(Index T) const;
};

/// Rows z_i = [y_{i-1..i-p}, x_{1,i-1..i-s}, ..., x_{k,i-1..i-s}] with
/// response y_i, for i = first_index, ..., T (1-based times).
struct LaggedDesign {
  Eigen::MatrixXd Z;
  Eigen::VectorXd y;
  int p = 0;
  int s = 0;
  Index k = 0;
  Index first_index = 0;  // 1-based time of the first row

  Index rows() const noexcept { return Z.rows(); }
  Index features() const noexcept { return Z.cols(); }
  /// 1-based time of the last row (the series length T).
  Index last_time() const noexcept { return first_index + Z.rows() - 1; }
  /// Row holding the response y_t.
  Index row_of(Index t) const noexcept { return t - first_index; }
  /// Number of rows whose response is observed by time t.
  Index rows_through(Index t) const noexcept { return t - first_index + 1; }
};

/// first_index defaults to max(p, s) + 1; a larger value gives a common
/// estimation sample across lag orders.
LaggedDesign build_lag_design(const SeriesSet& series, int p, int s_lags,
                              Index first_index = 0);

Eigen::VectorXd fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                        const Eigen::Ref<const Eigen::VectorXd>& y);
Eigen::VectorXd fit_ols(const LaggedDesign& design);

enum class InformationCriterion { AIC, BIC };

/// log(sigma2) + penalty * (p + k s) / T with sigma2 the mean squared OLS
/// residual and T = design.last_time().
double ic_score(const LaggedDesign& design, InformationCriterion criterion);

/// Same formula from its ingredients.
double ic_formula(double sigma2, Index params, Index T,
                  InformationCriterion criterion);

struct LagOrder {
  int p = 0;
  int s = 0;
  friend bool operator==(const LagOrder&, const LagOrder&) = default;
};

/// Exhaustive search over 0 <= p~ <= p_max, 0 <= s~ <= s_max (excluding
/// (0, 0)) on the common sample starting at max(p_max, s_max) + 1. Ties go
/// to fewer parameters, then smaller s~.
LagOrder ic_lag_select(const SeriesSet& series, int p_max, int s_max,
                       InformationCriterion criterion);

double sample_mean_forecast(std::span<const double> y);
double random_walk_forecast(std::span<const double> y);

}  // namespace onlasso
