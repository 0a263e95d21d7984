// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "onlasso/arx.hpp"

namespace onlasso {

struct SimConfig {
  Index k = 10;
  int p = 12;
  int s = 12;
  Index T = 250;
  double density = 0.1;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
  double spectral_cap = 0.95;
  int burn_in = 200;
  /// Fixed y-equation coefficients (length p + k s); skips the random draw
  /// and the rescaling, but not the cap check.
  std::optional<Eigen::VectorXd> phi;
  std::optional<Eigen::VectorXd> exo_ar;

  Index features() const noexcept { return p + k * s; }
  void validate() const;
};

struct TrueModel {
  Eigen::VectorXd phi;  // same column order as build_lag_design
  std::vector<Index> support;
  Eigen::VectorXd exo_ar;
  double spectral_radius = 0.0;
};

/// Largest eigenvalue modulus of the block companion matrix of the joint
/// (y, x) system.
double companion_spectral_radius(const Eigen::VectorXd& phi, int p, Index k, int s,
                                 const Eigen::VectorXd& exo_ar);

std::pair<SeriesSet, TrueModel> simulate_arx(const SimConfig& cfg);

}  // namespace onlasso
