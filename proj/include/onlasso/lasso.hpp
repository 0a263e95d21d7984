// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "onlasso/errors.hpp"
#include "onlasso/gram_inverse.hpp"

namespace onlasso {

/// min_phi 1/2 ||y - Z phi||^2 + lambda ||phi||_1, no intercept.
struct LassoProblem {
  Eigen::MatrixXd Z;
  Eigen::VectorXd y;
  double lambda = 0.0;

  Index rows() const noexcept { return Z.rows(); }
  Index features() const noexcept { return Z.cols(); }

  /// Throws DimensionMismatch / InvalidArgument / NonFinite.
  void validate() const;
};

/// Sufficient statistics of a design: Z'Z, Z'y, y'y and the row count. The
/// homotopy engine and the Gram-based solver work on these alone.
struct CrossProducts {
  Eigen::MatrixXd gram;
  Eigen::VectorXd xty;
  double yty = 0.0;
  Index rows = 0;

  static CrossProducts from_design(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                   const Eigen::Ref<const Eigen::VectorXd>& y);
  static CrossProducts empty(Index features);

  Index features() const noexcept { return xty.size(); }

  /// Appends the row (z', y_new).
  void absorb(double y_new, const Eigen::Ref<const Eigen::VectorXd>& z);
};

struct LassoSolution {
  Eigen::VectorXd phi;
  std::vector<Index> active;
  std::vector<int> signs;  // length m, entries in {-1, 0, 1}

  int sweeps = 0;
  double kkt_residual = 0.0;

  static LassoSolution from_coefficients(Eigen::VectorXd phi);
};

struct KktViolation {
  Index index;
  double correlation;  // Z_j'(y - Z phi)
  double bound;        // lambda * v_j on the active set, lambda elsewhere
};

struct CoordinateDescentOptions {
  double tol = 1e-8;
  int max_sweeps = 100000;
  /// Called after every full sweep with the current objective value.
  std::function<void(int sweep, double objective)> on_sweep;
};

/// Thrown when the sweep cap is hit; carries the best iterate.
class NoConvergence : public Error {
 public:
  NoConvergence(LassoSolution best, double kkt_residual)
      : Error(ErrorKind::NoConvergence,
              "sweep cap reached, KKT residual " +
                  std::to_string(kkt_residual)),
        best_(std::move(best)),
        kkt_residual_(kkt_residual) {}

  const LassoSolution& best() const noexcept { return best_; }
  double kkt_residual() const noexcept { return kkt_residual_; }

 private:
  LassoSolution best_;
  double kkt_residual_;
};

/// Cyclic coordinate descent on the raw design. Serves as the reference
/// solver: declared converged when the largest coefficient change in a sweep
/// drops below tol and the KKT residual is within 10 tol max(1, ||Z'y||_inf).
LassoSolution coordinate_descent(const LassoProblem& problem,
                                 const Eigen::VectorXd* init = nullptr,
                                 const CoordinateDescentOptions& opts = {});

/// Covariance-update coordinate descent on cross products. Same stopping rule.
LassoSolution coordinate_descent(const CrossProducts& xp, double lambda,
                                 const Eigen::VectorXd* init = nullptr,
                                 const CoordinateDescentOptions& opts = {});

/// phi_A = (Z_A'Z_A)^{-1} (Z_A'y - lambda v_A); signs has length m.
Eigen::VectorXd active_set_solution(const LassoProblem& problem,
                                    const std::vector<Index>& active,
                                    const std::vector<int>& signs,
                                    const GramInverse& ginv);

std::vector<KktViolation> kkt_check(const LassoProblem& problem,
                                    const LassoSolution& solution, double tol);

std::vector<KktViolation> kkt_check(const CrossProducts& xp, double lambda,
                                    const Eigen::Ref<const Eigen::VectorXd>& phi,
                                    double tol);

/// Largest KKT violation (0 when optimal), from residual correlations.
double kkt_residual(const Eigen::Ref<const Eigen::VectorXd>& correlations,
                    const Eigen::Ref<const Eigen::VectorXd>& phi,
                    double lambda);

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                  const Eigen::Ref<const Eigen::VectorXd>& y);
double lambda_max(const CrossProducts& xp);

double lasso_objective(const LassoProblem& problem,
                       const Eigen::Ref<const Eigen::VectorXd>& phi);

inline double soft_threshold(double x, double t) noexcept {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace onlasso
