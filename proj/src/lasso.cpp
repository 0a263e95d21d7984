// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace onlasso {

namespace {

int sign_of(double x) noexcept { return (x > 0.0) - (x < 0.0); }

std::vector<KktViolation> collect_violations(
    const Eigen::Ref<const Eigen::VectorXd>& corr,
    const Eigen::Ref<const Eigen::VectorXd>& phi, double lambda, double tol) {
  std::vector<KktViolation> out;
  for (Index j = 0; j < phi.size(); ++j) {
    const int v = sign_of(phi(j));
    if (v != 0) {
      const double bound = lambda * v;
      if (std::abs(corr(j) - bound) > tol) out.push_back({j, corr(j), bound});
    } else if (std::abs(corr(j)) > lambda + tol) {
      out.push_back({j, corr(j), lambda});
    }
  }
  return out;
}

}  // namespace

void LassoProblem::validate() const {
  if (Z.rows() < 1 || Z.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "empty design");
  }
  if (y.size() != Z.rows()) {
    throw Error(ErrorKind::DimensionMismatch,
                "response length " + std::to_string(y.size()) +
                    " != design rows " + std::to_string(Z.rows()));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be finite and >= 0");
  }
  if (!Z.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::NonFinite, "non-finite entry in lasso problem");
  }
}

CrossProducts CrossProducts::from_design(
    const Eigen::Ref<const Eigen::MatrixXd>& Z,
    const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != Z.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "response/design row mismatch");
  }
  CrossProducts xp;
  xp.gram = Z.transpose() * Z;
  xp.xty = Z.transpose() * y;
  xp.yty = y.squaredNorm();
  xp.rows = Z.rows();
  return xp;
}

CrossProducts CrossProducts::empty(Index features) {
  CrossProducts xp;
  xp.gram = Eigen::MatrixXd::Zero(features, features);
  xp.xty = Eigen::VectorXd::Zero(features);
  return xp;
}

void CrossProducts::absorb(double y_new,
                           const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != features()) {
    throw Error(ErrorKind::DimensionMismatch, "observation length mismatch");
  }
  gram.noalias() += z * z.transpose();
  xty.noalias() += y_new * z;
  yty += y_new * y_new;
  ++rows;
}

LassoSolution LassoSolution::from_coefficients(Eigen::VectorXd phi) {
  LassoSolution s;
  s.signs.assign(static_cast<std::size_t>(phi.size()), 0);
  for (Index j = 0; j < phi.size(); ++j) {
    const int v = sign_of(phi(j));
    s.signs[static_cast<std::size_t>(j)] = v;
    if (v != 0) s.active.push_back(j);
  }
  s.phi = std::move(phi);
  return s;
}

double kkt_residual(const Eigen::Ref<const Eigen::VectorXd>& corr,
                    const Eigen::Ref<const Eigen::VectorXd>& phi,
                    double lambda) {
  double worst = 0.0;
  for (Index j = 0; j < phi.size(); ++j) {
    const int v = sign_of(phi(j));
    const double gap = v != 0 ? std::abs(corr(j) - lambda * v)
                              : std::max(0.0, std::abs(corr(j)) - lambda);
    worst = std::max(worst, gap);
  }
  return worst;
}

LassoSolution coordinate_descent(const LassoProblem& problem,
                                 const Eigen::VectorXd* init,
                                 const CoordinateDescentOptions& opts) {
  problem.validate();
  if (!(opts.tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  }
  const auto& Z = problem.Z;
  const auto& y = problem.y;
  const double lambda = problem.lambda;
  const Index m = Z.cols();

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(m);
  if (init != nullptr) {
    if (init->size() != m) {
      throw Error(ErrorKind::DimensionMismatch, "initial iterate length");
    }
    phi = *init;
  }
  const Eigen::VectorXd col_sq = Z.colwise().squaredNorm().transpose();
  const double kkt_tol =
      10.0 * opts.tol * std::max(1.0, (Z.transpose() * y).cwiseAbs().maxCoeff());

  Eigen::VectorXd resid = y - Z * phi;
  double last_kkt = 0.0;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < m; ++j) {
      if (col_sq(j) == 0.0) {
        phi(j) = 0.0;
        continue;
      }
      const double rho = Z.col(j).dot(resid) + col_sq(j) * phi(j);
      const double next = soft_threshold(rho, lambda) / col_sq(j);
      const double delta = next - phi(j);
      if (delta != 0.0) {
        resid.noalias() -= delta * Z.col(j);
        phi(j) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (opts.on_sweep) {
      opts.on_sweep(sweep, 0.5 * resid.squaredNorm() + lambda * phi.lpNorm<1>());
    }
    if (max_change < opts.tol) {
      resid = y - Z * phi;
      const Eigen::VectorXd corr = Z.transpose() * resid;
      last_kkt = kkt_residual(corr, phi, lambda);
      if (last_kkt <= kkt_tol) {
        LassoSolution s = LassoSolution::from_coefficients(std::move(phi));
        s.sweeps = sweep;
        s.kkt_residual = last_kkt;
        return s;
      }
    }
  }
  resid = y - Z * phi;
  last_kkt = kkt_residual(Z.transpose() * resid, phi, lambda);
  LassoSolution best = LassoSolution::from_coefficients(std::move(phi));
  best.sweeps = opts.max_sweeps;
  best.kkt_residual = last_kkt;
  throw NoConvergence(std::move(best), last_kkt);
}

LassoSolution coordinate_descent(const CrossProducts& xp, double lambda,
                                 const Eigen::VectorXd* init,
                                 const CoordinateDescentOptions& opts) {
  if (!(opts.tol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  }
  if (!(lambda >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be >= 0");
  }
  const Index m = xp.features();
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(m);
  if (init != nullptr) {
    if (init->size() != m) {
      throw Error(ErrorKind::DimensionMismatch, "initial iterate length");
    }
    phi = *init;
  }
  const double kkt_tol =
      10.0 * opts.tol * std::max(1.0, m > 0 ? xp.xty.cwiseAbs().maxCoeff() : 0.0);

  // grad = Z'(y - Z phi)
  Eigen::VectorXd grad = xp.xty - xp.gram * phi;
  double last_kkt = 0.0;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double diag = xp.gram(j, j);
      if (diag <= 0.0) {
        phi(j) = 0.0;
        continue;
      }
      const double rho = grad(j) + diag * phi(j);
      const double next = soft_threshold(rho, lambda) / diag;
      const double delta = next - phi(j);
      if (delta != 0.0) {
        grad.noalias() -= delta * xp.gram.col(j);
        phi(j) = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    if (opts.on_sweep) {
      const double rss = xp.yty - 2.0 * phi.dot(xp.xty) + phi.dot(xp.gram * phi);
      opts.on_sweep(sweep, 0.5 * rss + lambda * phi.lpNorm<1>());
    }
    if (max_change < opts.tol) {
      grad = xp.xty - xp.gram * phi;
      last_kkt = kkt_residual(grad, phi, lambda);
      if (last_kkt <= kkt_tol) {
        LassoSolution s = LassoSolution::from_coefficients(std::move(phi));
        s.sweeps = sweep;
        s.kkt_residual = last_kkt;
        return s;
      }
    }
  }
  grad = xp.xty - xp.gram * phi;
  last_kkt = kkt_residual(grad, phi, lambda);
  LassoSolution best = LassoSolution::from_coefficients(std::move(phi));
  best.sweeps = opts.max_sweeps;
  best.kkt_residual = last_kkt;
  throw NoConvergence(std::move(best), last_kkt);
}

Eigen::VectorXd active_set_solution(const LassoProblem& problem,
                                    const std::vector<Index>& active,
                                    const std::vector<int>& signs,
                                    const GramInverse& ginv) {
  const Index m = problem.features();
  const auto na = static_cast<Index>(active.size());
  if (ginv.dim() != na) {
    throw Error(ErrorKind::DimensionMismatch,
                "Gram inverse dimension does not match active set size");
  }
  if (static_cast<Index>(signs.size()) != m || problem.y.size() != problem.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "sign vector length");
  }
  Eigen::VectorXd rhs(na);
  for (Index i = 0; i < na; ++i) {
    const Index j = active[static_cast<std::size_t>(i)];
    if (j < 0 || j >= m) {
      throw Error(ErrorKind::DimensionMismatch, "active index out of range");
    }
    rhs(i) = problem.Z.col(j).dot(problem.y) -
             problem.lambda * signs[static_cast<std::size_t>(j)];
  }
  return ginv.inv() * rhs;
}

std::vector<KktViolation> kkt_check(const LassoProblem& problem,
                                    const LassoSolution& solution, double tol) {
  if (solution.phi.size() != problem.features()) {
    throw Error(ErrorKind::DimensionMismatch, "solution length");
  }
  const Eigen::VectorXd corr =
      problem.Z.transpose() * (problem.y - problem.Z * solution.phi);
  return collect_violations(corr, solution.phi, problem.lambda, tol);
}

std::vector<KktViolation> kkt_check(const CrossProducts& xp, double lambda,
                                    const Eigen::Ref<const Eigen::VectorXd>& phi,
                                    double tol) {
  if (phi.size() != xp.features()) {
    throw Error(ErrorKind::DimensionMismatch, "solution length");
  }
  const Eigen::VectorXd corr = xp.xty - xp.gram * phi;
  return collect_violations(corr, phi, lambda, tol);
}

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (Z.rows() == 0 || Z.cols() == 0) {
    throw Error(ErrorKind::InvalidArgument, "empty design");
  }
  return (Z.transpose() * y).cwiseAbs().maxCoeff();
}

double lambda_max(const CrossProducts& xp) {
  if (xp.features() == 0) {
    throw Error(ErrorKind::InvalidArgument, "empty design");
  }
  return xp.xty.cwiseAbs().maxCoeff();
}

double lasso_objective(const LassoProblem& problem,
                       const Eigen::Ref<const Eigen::VectorXd>& phi) {
  return 0.5 * (problem.y - problem.Z * phi).squaredNorm() +
         problem.lambda * phi.lpNorm<1>();
}

}  // namespace onlasso
