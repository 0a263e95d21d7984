// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/arx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "onlasso/errors.hpp"

namespace onlasso {

void SeriesSet::validate() const {
  if (x.cols() > 0 && x.rows() != y.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "exogenous series length " + std::to_string(x.rows()) +
                    " != target length " + std::to_string(y.size()));
  }
  if (!y.allFinite() || !x.allFinite()) {
    throw Error(ErrorKind::NonFinite, "series contain non-finite values");
  }
}

SeriesSet SeriesSet::head(Index T) const {
  SeriesSet out;
  out.y = y.head(T);
  out.x = x.cols() > 0 ? Eigen::MatrixXd(x.topRows(T)) : Eigen::MatrixXd(T, 0);
  out.labels = labels;
  return out;
}

LaggedDesign build_lag_design(const SeriesSet& series, int p, int s_lags,
                              Index first_index) {
  series.validate();
  if (p < 0 || s_lags < 0) {
    throw Error(ErrorKind::InvalidArgument, "lag orders must be non-negative");
  }
  const Index k = series.exogenous();
  const Index cols = p + k * s_lags;
  if (cols < 1) {
    throw Error(ErrorKind::InvalidArgument, "design has no columns");
  }
  const Index T = series.length();
  const Index lag = std::max(p, s_lags);
  const Index first = first_index > 0 ? first_index : lag + 1;
  if (first < lag + 1) {
    throw Error(ErrorKind::InvalidArgument,
                "first index precedes the available lags");
  }
  if (T <= lag + 1 || first > T) {
    throw Error(ErrorKind::SeriesTooShort,
                "series of length " + std::to_string(T) +
                    " too short for max lag " + std::to_string(lag));
  }

  LaggedDesign d;
  d.p = p;
  d.s = s_lags;
  d.k = k;
  d.first_index = first;
  const Index rows = T - first + 1;
  d.Z.resize(rows, cols);
  d.y.resize(rows);
  for (Index r = 0; r < rows; ++r) {
    const Index i = first + r - 1;  // 0-based position of the response
    d.y(r) = series.y(i);
    Index c = 0;
    for (int j = 1; j <= p; ++j) d.Z(r, c++) = series.y(i - j);
    for (Index l = 0; l < k; ++l) {
      for (int j = 1; j <= s_lags; ++j) d.Z(r, c++) = series.x(i - j, l);
    }
  }
  return d;
}

Eigen::VectorXd fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (Z.rows() < Z.cols()) {
    throw Error(ErrorKind::RankDeficient,
                "fewer rows (" + std::to_string(Z.rows()) + ") than columns (" +
                    std::to_string(Z.cols()) + ")");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  const auto diag = qr.matrixQR().diagonal().cwiseAbs();
  if (Z.cols() > 0 && !(diag.minCoeff() > 1e-10 * diag.maxCoeff())) {
    throw Error(ErrorKind::RankDeficient, "design is numerically rank deficient");
  }
  return qr.solve(y);
}

Eigen::VectorXd fit_ols(const LaggedDesign& design) {
  return fit_ols(design.Z, design.y);
}

double ic_formula(double sigma2, Index params, Index T,
                  InformationCriterion criterion) {
  const double penalty = criterion == InformationCriterion::AIC
                             ? 2.0
                             : std::log(static_cast<double>(T));
  return std::log(sigma2) +
         penalty * static_cast<double>(params) / static_cast<double>(T);
}

double ic_score(const LaggedDesign& design, InformationCriterion criterion) {
  const Eigen::VectorXd phi = fit_ols(design);
  const double sigma2 =
      (design.y - design.Z * phi).squaredNorm() / static_cast<double>(design.rows());
  if (!(sigma2 > 0.0)) {
    throw Error(ErrorKind::RankDeficient, "zero residual variance");
  }
  return ic_formula(sigma2, design.features(), design.last_time(), criterion);
}

LagOrder ic_lag_select(const SeriesSet& series, int p_max, int s_max,
                       InformationCriterion criterion) {
  if (p_max < 0 || s_max < 0) {
    throw Error(ErrorKind::InvalidArgument, "lag bounds must be non-negative");
  }
  const Index k = series.exogenous();
  const Index first = std::max(p_max, s_max) + 1;
  const Index T = series.length();
  if (T <= first) {
    throw Error(ErrorKind::SeriesTooShort, "series too short for lag grid");
  }
  const Index rows = T - first + 1;

  LagOrder best;
  double best_score = std::numeric_limits<double>::infinity();
  Index best_params = 0;
  bool found = false;
  for (int p = 0; p <= p_max; ++p) {
    for (int s = 0; s <= s_max; ++s) {
      const Index params = p + k * s;
      if (params == 0 || params >= rows) continue;
      if (k == 0 && s > 0) continue;  // identical to s = 0
      double score;
      try {
        score = ic_score(build_lag_design(series, p, s, first), criterion);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::RankDeficient) throw;
        continue;
      }
      const bool better =
          !found || score < best_score ||
          (score == best_score &&
           (params < best_params || (params == best_params && s < best.s)));
      if (better) {
        best = {p, s};
        best_score = score;
        best_params = params;
        found = true;
      }
    }
  }
  if (!found) {
    throw Error(ErrorKind::SeriesTooShort, "no admissible lag order");
  }
  return best;
}

double sample_mean_forecast(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorKind::InvalidArgument, "empty series");
  double sum = 0.0;
  for (double v : y) sum += v;
  return sum / static_cast<double>(y.size());
}

double random_walk_forecast(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorKind::InvalidArgument, "empty series");
  return y.back();
}

}  // namespace onlasso
