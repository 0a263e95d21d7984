// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

namespace onlasso {

using Index = Eigen::Index;

/// Absolute guard used for Sherman-Morrison denominators, Schur complements
/// and diagonal pivots.
inline constexpr double kGuardTol = 1e-12;

/// Number of rank-one modifications after which owners rebuild the inverse
/// from the Gram matrix.
inline constexpr int kRefreshInterval = 500;

/// Inverse of the active-set Gram matrix G_A = Z_A' Z_A, kept current under
/// observation insertions (rank-one) and single-feature growth/shrinkage.
///
/// Value type with exclusive mutation; copying is the way to share.
class GramInverse {
 public:
  GramInverse() = default;
  explicit GramInverse(Eigen::MatrixXd inv) : inv_(std::move(inv)) {}

  /// Direct (Cholesky) inversion of a symmetric positive definite Gram.
  /// Throws SingularUpdate when the factorization fails.
  static GramInverse from_gram(const Eigen::Ref<const Eigen::MatrixXd>& gram);

  Index dim() const noexcept { return inv_.rows(); }
  const Eigen::MatrixXd& inv() const noexcept { return inv_; }

  /// Rank-one modifications applied since construction or the last refresh.
  int updates_since_refresh() const noexcept { return updates_; }

  /// inv <- (G + weight * z z')^{-1}.
  void observe(const Eigen::Ref<const Eigen::VectorXd>& z, double weight);

  /// Appends a feature with Z_A' z_new = cross and ||z_new||^2 = self_norm.
  void add_feature(const Eigen::Ref<const Eigen::VectorXd>& cross,
                   double self_norm);

  /// Deletes row/column idx of the underlying Gram.
  void remove_feature(Index idx);

  /// max |inv - inv'|
  double max_asymmetry() const;

 private:
  Eigen::MatrixXd inv_;
  int updates_ = 0;
};

GramInverse sm_observation_update(GramInverse g,
                                  const Eigen::Ref<const Eigen::VectorXd>& z,
                                  double weight);

GramInverse ginv_add_feature(GramInverse g,
                             const Eigen::Ref<const Eigen::VectorXd>& cross,
                             double self_norm);

GramInverse ginv_remove_feature(GramInverse g, Index idx);

}  // namespace onlasso
