// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference against the OpenMP grid kernel for rolling validation, and
// both online rules over the same origins.

#include <benchmark/benchmark.h>

#include "onlasso/datagen.hpp"
#include "onlasso/tuning.hpp"

namespace {

using namespace onlasso;

struct Fixture {
  LaggedDesign design;
  SplitConfig split;
  PenaltyGrid grid;
  double lambda_hat = 0.0;

  explicit Fixture(int k) {
    SimConfig cfg;
    cfg.k = k;
    cfg.seed = 1;
    const SeriesSet series = simulate_arx(cfg).first;
    design = build_lag_design(series, cfg.p, cfg.s);
    split = SplitConfig::with_training_length(series.length(), 76);
    grid = default_grid_through(design, split.T2, 50);
    lambda_hat = rolling_validate(design, grid, split, Execution::Serial).lambda;
  }
};

const Fixture& fixture(int k) {
  static const Fixture small(10);
  static const Fixture wide(40);
  return k == 10 ? small : wide;
}

void BM_RollingValidate(benchmark::State& state, Execution exec) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rolling_validate(f.design, f.grid, f.split, exec).lambda);
  }
  state.counters["features"] = static_cast<double>(f.design.features());
}

void BM_Online(benchmark::State& state, Method rule) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    const auto traj = online_evaluate(f.design, rule, f.lambda_hat, f.split.T1, f.split.T2);
    benchmark::DoNotOptimize(traj.entries.data());
  }
}

BENCHMARK_CAPTURE(BM_RollingValidate, serial, Execution::Serial)
    ->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_RollingValidate, parallel, Execution::Parallel)
    ->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Online, gradient, Method::OnlineGradient)
    ->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Online, newton, Method::OnlineNewton)
    ->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
