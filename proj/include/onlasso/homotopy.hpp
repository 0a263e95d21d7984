// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

// Incremental lasso engine. A solution is tracked as a piecewise-affine path
// in either the penalty (lambda-path, LARS style) or the weight gamma of one
// appended observation (gamma-path). RecLasso chains the two to move from the
// solution at (t, lambda_t) to the one at (t + 1, lambda_{t+1}).

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "onlasso/gram_inverse.hpp"
#include "onlasso/lasso.hpp"

namespace onlasso {

enum class TransitionKind { FeatureEnters, FeatureLeaves };

struct TransitionEvent {
  TransitionKind kind;
  Index feature;
  /// lambda on a lambda-path, gamma on a gamma-path.
  double location;
  /// Sign the feature takes (enters) or held (leaves).
  int sign;
};

/// Solution state on top of a set of cross products: active set A (in the
/// row order of ginv), sign vector v (length m), Phi_A and (Z_A'Z_A)^{-1}.
struct PathState {
  double lambda = 0.0;
  std::vector<Index> active;
  std::vector<int> signs;
  Eigen::VectorXd phi_active;
  GramInverse ginv;

  /// Zero solution at lambda_max of xp (at 1 when the design carries no
  /// signal, where every lambda gives zero).
  static PathState at_zero(const CrossProducts& xp);

  Eigen::VectorXd coefficients() const;
  double predict(const Eigen::Ref<const Eigen::VectorXd>& z) const;
};

struct HomotopyOptions {
  /// Recover from stalls, singular updates and failed post-checks by a
  /// warm-started coordinate-descent re-solve. When false those errors throw.
  bool fallback = true;
  /// Post-update KKT check, relative to max(1, ||Z'y||_inf).
  double verify_tol = 1e-9;
};

struct PathReport {
  int events = 0;
  int refactorizations = 0;
  bool fallback = false;
};

/// Residual correlations Z'(y - Z phi) for all m features.
Eigen::VectorXd residual_correlations(const CrossProducts& xp,
                                      const PathState& state);

/// Moves state along the lambda-path of xp to lambda_to (either direction).
/// Throws PathStalled after more than 10 m events when fallback is off.
PathReport lambda_path(const CrossProducts& xp, PathState& state,
                       double lambda_to, const HomotopyOptions& opts = {},
                       std::vector<TransitionEvent>* log = nullptr);

/// Next active-set change of the augmented problem with the row
/// gamma * (y_new, z_new') appended, for gamma in (gamma_now, 1]. The state's
/// ginv must already reflect G_A + gamma_now^2 z_A z_A'.
std::optional<TransitionEvent> gamma_transition(
    const CrossProducts& xp, const PathState& state, double gamma_now,
    double y_new, const Eigen::Ref<const Eigen::VectorXd>& z_new);

/// One RecLasso step: lambda-path to lambda_new on xp, then the gamma-path
/// from 0 to 1. On return the state solves the problem on xp plus the new
/// row; xp itself is not modified.
PathReport reclasso_step(const CrossProducts& xp, PathState& state,
                         double y_new,
                         const Eigen::Ref<const Eigen::VectorXd>& z_new,
                         double lambda_new, const HomotopyOptions& opts = {},
                         std::vector<TransitionEvent>* log = nullptr);

/// Rebuilds the state from a coefficient vector: active set from its
/// support, ginv by direct factorization, Phi_A by the closed form.
void rebuild_state(const CrossProducts& xp, PathState& state,
                   const Eigen::Ref<const Eigen::VectorXd>& phi, double lambda);

/// Data plus solution for a single online model.
class ActiveModel {
 public:
  ActiveModel() = default;
  explicit ActiveModel(CrossProducts data)
      : data_(std::move(data)), state_(PathState::at_zero(data_)) {}

  static ActiveModel fit(CrossProducts data, double lambda,
                         const HomotopyOptions& opts = {});
  static ActiveModel fit(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                         const Eigen::Ref<const Eigen::VectorXd>& y,
                         double lambda, const HomotopyOptions& opts = {});

  const CrossProducts& data() const noexcept { return data_; }
  const PathState& state() const noexcept { return state_; }
  PathState& state() noexcept { return state_; }

  double lambda() const noexcept { return state_.lambda; }
  Index features() const noexcept { return data_.features(); }
  const std::vector<Index>& active() const noexcept { return state_.active; }

  Eigen::VectorXd coefficients() const { return state_.coefficients(); }
  Eigen::VectorXd correlations() const {
    return residual_correlations(data_, state_);
  }
  double predict(const Eigen::Ref<const Eigen::VectorXd>& z) const {
    return state_.predict(z);
  }

  friend PathReport reclasso_update(ActiveModel& model, double y_new,
                                    const Eigen::Ref<const Eigen::VectorXd>& z_new,
                                    double lambda_new,
                                    const HomotopyOptions& opts,
                                    std::vector<TransitionEvent>* log);

 private:
  CrossProducts data_;
  PathState state_;
};

PathReport lambda_path(ActiveModel& model, double lambda_to,
                       const HomotopyOptions& opts = {},
                       std::vector<TransitionEvent>* log = nullptr);

std::optional<TransitionEvent> gamma_transition(
    const ActiveModel& model, double gamma_now, double y_new,
    const Eigen::Ref<const Eigen::VectorXd>& z_new);

/// Folds (y_new, z_new) into the model at penalty lambda_new.
PathReport reclasso_update(ActiveModel& model, double y_new,
                           const Eigen::Ref<const Eigen::VectorXd>& z_new,
                           double lambda_new, const HomotopyOptions& opts = {},
                           std::vector<TransitionEvent>* log = nullptr);

}  // namespace onlasso
