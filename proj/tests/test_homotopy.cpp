// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "onlasso/homotopy.hpp"
#include "support/oracles.hpp"

using namespace onlasso;
using onlasso::testing::oracle_solve;
using onlasso::testing::random_matrix;
using onlasso::testing::random_problem;
using onlasso::testing::random_vector;

namespace {

const HomotopyOptions kStrict{.fallback = false};

double max_coef_gap(const ActiveModel& model, const Eigen::MatrixXd& Z,
                    const Eigen::VectorXd& y) {
  const auto ref = oracle_solve(Z, y, model.lambda());
  return (model.coefficients() - ref).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd append_row(const Eigen::MatrixXd& Z, const Eigen::VectorXd& z) {
  Eigen::MatrixXd out(Z.rows() + 1, Z.cols());
  out << Z, z.transpose();
  return out;
}

Eigen::VectorXd append(const Eigen::VectorXd& y, double v) {
  Eigen::VectorXd out(y.size() + 1);
  out << y, v;
  return out;
}

}  // namespace

TEST(LambdaPath, SameLambdaIsNoOp) {
  std::mt19937_64 rng(1);
  const auto p = random_problem(rng, 30, 6, 0.3);
  auto model = ActiveModel::fit(p.Z, p.y, p.lambda, kStrict);
  const Eigen::VectorXd before = model.coefficients();
  std::vector<TransitionEvent> log;
  lambda_path(model, model.lambda(), kStrict, &log);
  EXPECT_TRUE(log.empty());
  EXPECT_EQ(model.coefficients(), before);
}

TEST(LambdaPath, FirstEntryIsArgmaxCorrelation) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_problem(rng, 25, 9, 0.0);
    ActiveModel model(CrossProducts::from_design(p.Z, p.y));
    const double lmax = lambda_max(p.Z, p.y);
    EXPECT_DOUBLE_EQ(model.lambda(), lmax);
    std::vector<TransitionEvent> log;
    lambda_path(model, 0.999 * lmax, kStrict, &log);
    ASSERT_EQ(log.size(), 1u);
    EXPECT_EQ(log[0].kind, TransitionKind::FeatureEnters);
    Index argmax = 0;
    (p.Z.transpose() * p.y).cwiseAbs().maxCoeff(&argmax);
    EXPECT_EQ(log[0].feature, argmax);
  }
}

TEST(LambdaPath, EndpointMatchesOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_problem(rng, 30, 8, 0.8);
    auto model = ActiveModel::fit(p.Z, p.y, p.lambda, kStrict);
    const double lmax = lambda_max(p.Z, p.y);
    lambda_path(model, 0.2 * lmax, kStrict);
    EXPECT_LT(max_coef_gap(model, p.Z, p.y), 1e-6);
    lambda_path(model, 0.6 * lmax, kStrict);  // and back up
    EXPECT_LT(max_coef_gap(model, p.Z, p.y), 1e-6);
  }
}

TEST(LambdaPath, EventsChangeOneFeatureAndAreContinuous) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_problem(rng, 40, 10, 0.0);
    ActiveModel model(CrossProducts::from_design(p.Z, p.y));
    std::vector<TransitionEvent> log;
    lambda_path(model, 0.01 * model.lambda(), kStrict, &log);
    std::set<Index> active;
    for (const auto& ev : log) {
      if (ev.kind == TransitionKind::FeatureEnters) {
        EXPECT_TRUE(active.insert(ev.feature).second);
      } else {
        EXPECT_EQ(active.erase(ev.feature), 1u);
      }
      // the changing coefficient is zero at the event location
      const auto ref = oracle_solve(p.Z, p.y, ev.location, 1e-14);
      EXPECT_LT(std::abs(ref(ev.feature)), 1e-8);
    }
    EXPECT_EQ(active, std::set<Index>(model.active().begin(), model.active().end()));
  }
}

TEST(GammaTransition, InertRowHasNoEvent) {
  std::mt19937_64 rng(5);
  const auto p = random_problem(rng, 30, 6, 0.2);
  const auto model = ActiveModel::fit(p.Z, p.y, p.lambda, kStrict);
  for (double g : {0.0, 0.3, 0.9}) {
    EXPECT_FALSE(gamma_transition(model, g, 1.7, Eigen::VectorXd::Zero(6)));
  }
}

TEST(GammaTransition, ExactlyPredictedRowHasNoEvent) {
  std::mt19937_64 rng(6);
  const auto p = random_problem(rng, 40, 6, 0.1);
  const auto model = ActiveModel::fit(p.Z, p.y, p.lambda, kStrict);
  ASSERT_FALSE(model.active().empty());
  const Eigen::VectorXd z = random_vector(rng, 6);
  const double y_new = z.dot(model.coefficients());
  EXPECT_FALSE(gamma_transition(model, 0.0, y_new, z));
  // the oracle on the extended data keeps the same support
  const auto ref = oracle_solve(append_row(p.Z, z), append(p.y, y_new), p.lambda);
  const auto sol = LassoSolution::from_coefficients(ref);
  EXPECT_EQ(sol.active.size(), model.active().size());
}

TEST(GammaTransition, EngineeredSignFlipAtHalf) {
  // Z = [1; 1], y = [1; 1], lambda = 1: phi = (2 - 1) / 2 = 0.5.
  // Appending gamma*(y=-2, z=1): phi(mu) = (1 - 2 mu) / (2 + mu), zero at mu = 1/2.
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Ones(2, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Ones(2);
  const auto model = ActiveModel::fit(Z, y, 1.0, kStrict);
  ASSERT_NEAR(model.coefficients()(0), 0.5, 1e-15);
  const auto ev = gamma_transition(model, 0.0, -2.0, Eigen::VectorXd::Ones(1));
  ASSERT_TRUE(ev);
  EXPECT_EQ(ev->kind, TransitionKind::FeatureLeaves);
  EXPECT_EQ(ev->feature, 0);
  EXPECT_NEAR(ev->location, std::sqrt(0.5), 1e-9);

  // oracle on the weighted problem just below / above the transition
  for (double mu : {0.5 - 1e-6, 0.5 + 1e-6}) {
    const double g = std::sqrt(mu);
    const Eigen::MatrixXd Zg = append_row(Z, Eigen::VectorXd::Constant(1, g));
    const Eigen::VectorXd yg = append(y, -2.0 * g);
    const auto ref = oracle_solve(Zg, yg, 1.0);
    if (mu < 0.5) {
      EXPECT_GT(ref(0), 0.0);
    } else {
      EXPECT_EQ(ref(0), 0.0);
    }
  }
}

TEST(Reclasso, InertObservationKeepsCoefficients) {
  std::mt19937_64 rng(7);
  const auto p = random_problem(rng, 30, 8, 0.2);
  auto model = ActiveModel::fit(p.Z, p.y, p.lambda, kStrict);
  const Eigen::VectorXd before = model.coefficients();
  reclasso_update(model, 0.0, Eigen::VectorXd::Zero(8), model.lambda(), kStrict);
  EXPECT_LT((model.coefficients() - before).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(model.data().rows, 31);
}

TEST(Reclasso, AboveExtendedLambdaMaxGivesZero) {
  std::mt19937_64 rng(8);
  const auto p = random_problem(rng, 30, 8, 0.2);
  auto model = ActiveModel::fit(p.Z, p.y, p.lambda, kStrict);
  const Eigen::VectorXd z = random_vector(rng, 8);
  const double y_new = 3.0;
  const double lmax_ext = lambda_max(append_row(p.Z, z), append(p.y, y_new));
  reclasso_update(model, y_new, z, 1.01 * lmax_ext, kStrict);
  EXPECT_TRUE(model.active().empty());
  EXPECT_EQ(model.coefficients().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Reclasso, SequentialUpdatesMatchOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const Index m = 5 + 3 * trial;
    const Index n0 = std::max<Index>(20, m / 2);
    const Eigen::MatrixXd Zall = random_matrix(rng, n0 + 30, m);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
    for (Index j = 0; j < m; j += 4) beta(j) = (j % 8 == 0 ? 1.0 : -0.7);
    const Eigen::VectorXd yall = Zall * beta + random_vector(rng, n0 + 30);

    double lambda = 0.3 * lambda_max(Zall.topRows(n0), yall.head(n0));
    auto model = ActiveModel::fit(Zall.topRows(n0), yall.head(n0), lambda, kStrict);
    for (Index t = n0; t < n0 + 30; ++t) {
      lambda *= std::exp(std::normal_distribution<double>(0.0, 0.2)(rng));
      std::vector<TransitionEvent> log;
      const auto rep = reclasso_update(model, yall(t), Zall.row(t).transpose(),
                                       lambda, kStrict, &log);
      EXPECT_FALSE(rep.fallback);
      const auto Zt = Zall.topRows(t + 1);
      const auto yt = yall.head(t + 1);
      EXPECT_LT(max_coef_gap(model, Zt, yt), 1e-6) << "trial " << trial << " t " << t;
      LassoProblem prob{Zt, yt, lambda};
      EXPECT_TRUE(kkt_check(prob, LassoSolution::from_coefficients(model.coefficients()), 1e-6).empty());
    }
  }
}

TEST(Reclasso, FallbackRecoversFromSingularState) {
  // Duplicate columns make the active Gram singular as soon as both would
  // enter; with the fallback the model still lands on a KKT point.
  std::mt19937_64 rng(10);
  Eigen::MatrixXd Z = random_matrix(rng, 30, 4);
  Z.col(3) = Z.col(2);
  const Eigen::VectorXd y = Z.col(2) * 2.0 + random_vector(rng, 30) * 0.1;
  auto model = ActiveModel::fit(Z, y, 0.05 * lambda_max(Z, y));
  LassoProblem prob{Z, y, model.lambda()};
  EXPECT_TRUE(kkt_check(prob, LassoSolution::from_coefficients(model.coefficients()), 1e-6).empty());
}

TEST(Reclasso, StrictModeSurfacesErrors) {
  std::mt19937_64 rng(11);
  const auto p = random_problem(rng, 20, 4, 0.2);
  auto model = ActiveModel::fit(p.Z, p.y, p.lambda, kStrict);
  EXPECT_THROW(reclasso_update(model, 1.0, Eigen::VectorXd::Zero(3), 1.0, kStrict), Error);
  EXPECT_THROW(reclasso_update(model, 1.0, Eigen::VectorXd::Zero(4), -1.0, kStrict), Error);
}
