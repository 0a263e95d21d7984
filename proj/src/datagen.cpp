// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "onlasso/errors.hpp"

namespace onlasso {

namespace {

constexpr int kMaxHalvings = 100;
constexpr int kRefineSteps = 40;
constexpr int kMaxRedraws = 20;

struct Draw {
  Eigen::VectorXd phi;
  std::vector<Index> support;
};

Draw draw_coefficients(const SimConfig& cfg, std::mt19937_64& rng) {
  const Index m = cfg.features();
  const auto count = std::clamp<Index>(
      static_cast<Index>(std::llround(cfg.density * static_cast<double>(m))), 1, m);
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  Draw d;
  d.support.assign(order.begin(), order.begin() + count);
  std::sort(d.support.begin(), d.support.end());
  d.phi = Eigen::VectorXd::Zero(m);
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (Index j : d.support) d.phi(j) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  return d;
}

std::vector<Index> support_of(const Eigen::VectorXd& phi) {
  std::vector<Index> out;
  for (Index j = 0; j < phi.size(); ++j)
    if (phi(j) != 0.0) out.push_back(j);
  return out;
}

// Largest c in (0, 1] (found by halving, then bisection) with the radius of
// c * phi at most the cap.
double rescale_factor(const SimConfig& cfg, const Eigen::VectorXd& phi,
                      const Eigen::VectorXd& exo_ar) {
  auto radius = [&](double c) {
    return companion_spectral_radius(c * phi, cfg.p, cfg.k, cfg.s, exo_ar);
  };
  if (radius(1.0) <= cfg.spectral_cap) return 1.0;
  if (radius(0.0) > cfg.spectral_cap) {
    throw Error(ErrorKind::RescaleFailed, "exogenous dynamics exceed the spectral cap");
  }
  double hi = 1.0;
  double lo = 0.5;
  int halvings = 1;
  while (radius(lo) > cfg.spectral_cap) {
    if (++halvings > kMaxHalvings) {
      throw Error(ErrorKind::RescaleFailed,
                  "spectral radius above cap after " + std::to_string(kMaxHalvings) +
                      " halvings");
    }
    hi = lo;
    lo *= 0.5;
  }
  for (int i = 0; i < kRefineSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (radius(mid) <= cfg.spectral_cap ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::InvalidArgument, msg);
  };
  if (k < 0 || p < 0 || s < 0) fail("dimensions must be non-negative");
  if (features() < 1) fail("model has no coefficients");
  if (T <= std::max(p, s) + 1) fail("T must exceed max(p, s) + 1");
  if (!(density > 0.0 && density <= 1.0)) fail("density must lie in (0, 1]");
  if (!(spectral_cap > 0.0 && spectral_cap < 1.0)) fail("spectral cap must lie in (0, 1)");
  if (!(noise_sd >= 0.0)) fail("noise_sd must be non-negative");
  if (burn_in < 0) fail("burn-in must be non-negative");
  if (phi && phi->size() != features()) fail("phi has the wrong length");
  if (exo_ar && exo_ar->size() != k) fail("exo_ar has the wrong length");
}

double companion_spectral_radius(const Eigen::VectorXd& phi, int p, Index k, int s,
                                 const Eigen::VectorXd& exo_ar) {
  if (phi.size() != p + k * s || exo_ar.size() != k) {
    throw Error(ErrorKind::DimensionMismatch, "coefficient dimensions disagree");
  }
  const Index n = 1 + k;
  const Index L = std::max({p, s, 1});
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n * L, n * L);
  for (int j = 1; j <= p; ++j) C(0, (j - 1) * n) = phi(j - 1);
  for (Index l = 0; l < k; ++l) {
    for (int j = 1; j <= s; ++j) C(0, (j - 1) * n + 1 + l) = phi(p + l * s + j - 1);
    C(1 + l, 1 + l) = exo_ar(l);
  }
  if (L > 1) C.bottomLeftCorner(n * (L - 1), n * (L - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::pair<SeriesSet, TrueModel> simulate_arx(const SimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);

  TrueModel truth;
  if (cfg.exo_ar) {
    truth.exo_ar = *cfg.exo_ar;
  } else {
    std::uniform_real_distribution<double> ar(0.3, 0.7);
    truth.exo_ar.resize(cfg.k);
    for (Index l = 0; l < cfg.k; ++l) truth.exo_ar(l) = ar(rng);
  }

  if (cfg.phi) {
    truth.phi = *cfg.phi;
    truth.support = support_of(truth.phi);
    truth.spectral_radius =
        companion_spectral_radius(truth.phi, cfg.p, cfg.k, cfg.s, truth.exo_ar);
    if (truth.spectral_radius > cfg.spectral_cap) {
      throw Error(ErrorKind::RescaleFailed, "given coefficients exceed the spectral cap");
    }
  } else {
    for (int attempt = 0;; ++attempt) {
      Draw d = draw_coefficients(cfg, rng);
      try {
        truth.phi = rescale_factor(cfg, d.phi, truth.exo_ar) * d.phi;
        truth.support = std::move(d.support);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::RescaleFailed || attempt + 1 >= kMaxRedraws) throw;
      }
    }
    truth.spectral_radius =
        companion_spectral_radius(truth.phi, cfg.p, cfg.k, cfg.s, truth.exo_ar);
  }

  const Index lag = std::max(cfg.p, cfg.s);
  const Index total = lag + cfg.burn_in + cfg.T;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(total);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total, cfg.k);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (Index t = lag; t < total; ++t) {
    for (Index l = 0; l < cfg.k; ++l) {
      x(t, l) = truth.exo_ar(l) * x(t - 1, l) + noise(rng);
    }
    double v = 0.0;
    for (int j = 1; j <= cfg.p; ++j) v += truth.phi(j - 1) * y(t - j);
    for (Index l = 0; l < cfg.k; ++l)
      for (int j = 1; j <= cfg.s; ++j)
        v += truth.phi(cfg.p + l * cfg.s + j - 1) * x(t - j, l);
    y(t) = v + cfg.noise_sd * noise(rng);
  }

  SeriesSet out;
  out.y = y.tail(cfg.T);
  out.x = x.bottomRows(cfg.T);
  out.labels.push_back("y");
  for (Index l = 0; l < cfg.k; ++l) out.labels.push_back("x" + std::to_string(l + 1));
  return {std::move(out), std::move(truth)};
}

}  // namespace onlasso
