// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/gram_inverse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "onlasso/errors.hpp"

namespace onlasso {

GramInverse GramInverse::from_gram(
    const Eigen::Ref<const Eigen::MatrixXd>& gram) {
  if (gram.rows() != gram.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "Gram matrix is not square");
  }
  if (gram.rows() == 0) return GramInverse{};
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::SingularUpdate,
                "active Gram is not positive definite");
  }
  Eigen::MatrixXd inv = llt.solve(
      Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
  const Eigen::MatrixXd sym = 0.5 * (inv + inv.transpose());
  return GramInverse(sym);
}

void GramInverse::observe(const Eigen::Ref<const Eigen::VectorXd>& z,
                          double weight) {
  if (z.size() != dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "observation length " + std::to_string(z.size()) +
                    " != active dimension " + std::to_string(dim()));
  }
  if (dim() == 0 || weight == 0.0) return;
  const Eigen::VectorXd u = inv_ * z;
  const double denom = 1.0 + weight * z.dot(u);
  if (!(std::abs(denom) > kGuardTol)) {
    throw Error(ErrorKind::SingularUpdate,
                "Sherman-Morrison denominator " + std::to_string(denom));
  }
  inv_.noalias() -= (weight / denom) * (u * u.transpose());
  ++updates_;
}

void GramInverse::add_feature(const Eigen::Ref<const Eigen::VectorXd>& cross,
                              double self_norm) {
  if (cross.size() != dim()) {
    throw Error(ErrorKind::DimensionMismatch,
                "cross-product length does not match active dimension");
  }
  const Index d = dim();
  const Eigen::VectorXd b = inv_ * cross;
  const double schur = self_norm - cross.dot(b);
  if (!(schur > kGuardTol * std::max(1.0, std::abs(self_norm)))) {
    throw Error(ErrorKind::DegenerateFeature,
                "Schur complement " + std::to_string(schur));
  }
  Eigen::MatrixXd grown(d + 1, d + 1);
  grown.topLeftCorner(d, d) = inv_ + (b * b.transpose()) / schur;
  grown.topRightCorner(d, 1) = -b / schur;
  grown.bottomLeftCorner(1, d) = -b.transpose() / schur;
  grown(d, d) = 1.0 / schur;
  inv_ = std::move(grown);
  ++updates_;
}

void GramInverse::remove_feature(Index idx) {
  const Index d = dim();
  if (idx < 0 || idx >= d) {
    throw Error(ErrorKind::DimensionMismatch,
                "feature position " + std::to_string(idx) + " out of range");
  }
  const double pivot = inv_(idx, idx);
  if (!(pivot > kGuardTol)) {
    throw Error(ErrorKind::SingularUpdate,
                "diagonal pivot " + std::to_string(pivot));
  }
  Eigen::MatrixXd shrunk(d - 1, d - 1);
  Eigen::VectorXd a(d - 1);
  for (Index i = 0, ii = 0; i < d; ++i) {
    if (i == idx) continue;
    a(ii) = inv_(i, idx);
    for (Index j = 0, jj = 0; j < d; ++j) {
      if (j == idx) continue;
      shrunk(ii, jj) = inv_(i, j);
      ++jj;
    }
    ++ii;
  }
  shrunk.noalias() -= (a * a.transpose()) / pivot;
  inv_ = std::move(shrunk);
  ++updates_;
}

double GramInverse::max_asymmetry() const {
  if (dim() == 0) return 0.0;
  return (inv_ - inv_.transpose()).cwiseAbs().maxCoeff();
}

GramInverse sm_observation_update(GramInverse g,
                                  const Eigen::Ref<const Eigen::VectorXd>& z,
                                  double weight) {
  g.observe(z, weight);
  return g;
}

GramInverse ginv_add_feature(GramInverse g,
                             const Eigen::Ref<const Eigen::VectorXd>& cross,
                             double self_norm) {
  g.add_feature(cross, self_norm);
  return g;
}

GramInverse ginv_remove_feature(GramInverse g, Index idx) {
  g.remove_feature(idx);
  return g;
}

}  // namespace onlasso
