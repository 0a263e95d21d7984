// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: simulate, tune, evaluate, bench.
// Exit codes: 0 success, 1 usage, 2 data, 3 numerical failure.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "onlasso/datagen.hpp"
#include "onlasso/errors.hpp"
#include "onlasso/experiment.hpp"
#include "onlasso/ingest.hpp"

using namespace onlasso;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct SimFlags {
  int k = 10;
  Index T = 250;
  double density = 0.1;
  double noise_sd = 1.0;
  std::uint64_t seed = 1;
};

struct DataFlags {
  std::string input;
  std::string target;
  std::vector<std::string> exogenous;
  std::vector<std::string> ignore;
  std::vector<std::string> transforms;  // name=code
  int aggregate = 1;
  bool raw = false;
};

struct SplitFlags {
  std::optional<double> train_frac;
  std::optional<Index> train_len;
  std::optional<Index> t1;
  std::optional<Index> t2;

  SplitRule rule() const { return {train_frac, train_len, t1, t2}; }
};

struct OutputFlags {
  std::string json;
  std::string csv;
};

void add_sim_flags(CLI::App* app, SimFlags& f) {
  app->add_option("--k", f.k, "Number of exogenous series")->check(CLI::NonNegativeNumber);
  app->add_option("--T", f.T, "Series length")->check(CLI::PositiveNumber);
  app->add_option("--density", f.density, "Fraction of nonzero coefficients");
  app->add_option("--noise-sd", f.noise_sd, "Innovation standard deviation");
  app->add_option("--seed", f.seed, "Simulation seed (replication r uses seed + r)");
}

void add_data_flags(CLI::App* app, DataFlags& f) {
  app->add_option("--input", f.input, "CSV file instead of simulated data");
  app->add_option("--target", f.target, "Target column (default: first data column)");
  app->add_option("--exogenous", f.exogenous, "Exogenous columns (default: all others)")
      ->delimiter(',');
  app->add_option("--ignore", f.ignore, "Columns to drop")->delimiter(',');
  app->add_option("--transform", f.transforms, "Transform override NAME=CODE (1-7)")
      ->delimiter(',');
  app->add_option("--aggregate", f.aggregate, "Average blocks of N rows (3: monthly to quarterly)")
      ->check(CLI::PositiveNumber);
  app->add_flag("--raw", f.raw, "Skip normalization of CSV input");
}

void add_split_flags(CLI::App* app, SplitFlags& f) {
  app->add_option("--train-frac", f.train_frac, "T2 = floor(frac * T)");
  app->add_option("--train-len", f.train_len, "T1 = T2 - len");
  app->add_option("--t1", f.t1, "First validation origin");
  app->add_option("--t2", f.t2, "First evaluation origin");
}

void add_output_flags(CLI::App* app, OutputFlags& f) {
  app->add_option("--json", f.json, "Write a JSON report to this path ('-' for stdout)");
  app->add_option("--csv", f.csv, "Write a CSV table to this path ('-' for stdout)");
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::InvalidArgument, "write to '" + path + "' failed");
}

SimConfig sim_config(const SimFlags& f, int p, int s) {
  SimConfig c;
  c.k = f.k;
  c.p = p;
  c.s = s;
  c.T = f.T;
  c.density = f.density;
  c.noise_sd = f.noise_sd;
  c.seed = f.seed;
  return c;
}

CsvSpec csv_spec(const DataFlags& f) {
  CsvSpec spec;
  spec.target = f.target;
  spec.exogenous = f.exogenous;
  spec.ignore = f.ignore;
  spec.aggregate = f.aggregate;
  for (const auto& t : f.transforms) {
    const auto eq = t.find('=');
    int code = 0;
    try {
      if (eq == std::string::npos) throw std::invalid_argument(t);
      std::size_t used = 0;
      code = std::stoi(t.substr(eq + 1), &used);
      if (used != t.size() - eq - 1) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "--transform expects NAME=CODE, got '" + t + "'");
    }
    spec.transforms[t.substr(0, eq)] = code;
  }
  return spec;
}

// CSV data, normalized with statistics through T2 unless --raw.
SeriesSet load_input(const DataFlags& f, const SplitRule& split) {
  SeriesSet s = load_csv(f.input, csv_spec(f));
  if (!f.raw) normalize_series(s, split.resolve(s.length()).T2);
  return s;
}

std::string describe_input(const DataFlags& f) {
  std::ostringstream os;
  os << "csv " << f.input;
  if (f.aggregate > 1) os << " aggregate=" << f.aggregate;
  if (!f.raw) os << " normalized";
  return os.str();
}

int run_simulate(const SimFlags& sim, int p, int s, const std::string& output,
                 const std::string& truth) {
  const auto [series, model] = simulate_arx(sim_config(sim, p, s));
  if (output.empty() || output == "-") {
    write_csv(std::cout, series);
  } else {
    write_csv(output, series);
  }
  if (!truth.empty()) {
    nlohmann::json j;
    j["phi"] = std::vector<double>(model.phi.data(), model.phi.data() + model.phi.size());
    j["support"] = model.support;
    j["exo_ar"] = std::vector<double>(model.exo_ar.data(), model.exo_ar.data() + model.exo_ar.size());
    j["spectral_radius"] = model.spectral_radius;
    write_text(truth, j.dump(2) + "\n");
  }
  return kOk;
}

int run_tune(const SimFlags& sim, const DataFlags& data, const SplitFlags& split_flags,
             const OutputFlags& out, int p, int s, Index grid_size, bool serial) {
  const SplitRule rule = split_flags.rule();
  const SeriesSet series =
      data.input.empty() ? simulate_arx(sim_config(sim, p, s)).first : load_input(data, rule);
  const LaggedDesign design = build_lag_design(series, p, s);
  const SplitConfig split = rule.resolve(series.length());
  split.validate(design);
  const PenaltyGrid grid = default_grid_through(design, split.T2, grid_size);
  const ValidationResult v = rolling_validate(design, grid, split,
                                              serial ? Execution::Serial : Execution::Parallel);

  std::cout << "features " << design.features() << ", validation origins [" << split.T1 << ", "
            << split.T2 << ")\n";
  std::cout << std::setw(16) << "lambda" << std::setw(16) << "msfe" << '\n';
  std::cout << std::scientific << std::setprecision(6);
  for (Index i = 0; i < grid.size(); ++i) {
    std::cout << std::setw(16) << grid.values[static_cast<std::size_t>(i)] << std::setw(16)
              << v.msfe(i) << (i == v.index ? "  <-" : "") << '\n';
  }
  std::cout << "lambda_hat " << v.lambda << '\n';

  if (!out.json.empty()) {
    nlohmann::json j;
    j["T1"] = split.T1;
    j["T2"] = split.T2;
    j["features"] = design.features();
    j["lambda_hat"] = v.lambda;
    j["index"] = v.index;
    j["lambda"] = grid.values;
    j["msfe"] = std::vector<double>(v.msfe.data(), v.msfe.data() + v.msfe.size());
    write_text(out.json, j.dump(2) + "\n");
  }
  if (!out.csv.empty()) {
    std::ostringstream os;
    os << std::setprecision(17) << "lambda,msfe\n";
    for (Index i = 0; i < grid.size(); ++i)
      os << grid.values[static_cast<std::size_t>(i)] << ',' << v.msfe(i) << '\n';
    write_text(out.csv, os.str());
  }
  return kOk;
}

std::vector<ForecastMethod> chosen_methods(const std::vector<std::string>& names,
                                           const std::string& rule) {
  if (!rule.empty() && !names.empty()) {
    throw Error(ErrorKind::InvalidArgument, "--rule and --methods are mutually exclusive");
  }
  if (!rule.empty()) {
    const ForecastMethod m = parse_forecast_method(rule);
    if (m != ForecastMethod::Static && m != ForecastMethod::RollingWindow &&
        m != ForecastMethod::Gradient && m != ForecastMethod::Newton) {
      throw Error(ErrorKind::InvalidArgument,
                  "--rule takes gradient, newton, static or rolling-window");
    }
    return {m};
  }
  if (names.empty()) return all_forecast_methods();
  std::vector<ForecastMethod> out;
  for (const auto& n : names) out.push_back(parse_forecast_method(n));
  return out;
}

int run_evaluate(const SimFlags& sim, const DataFlags& data, const SplitFlags& split_flags,
                 const OutputFlags& out, ComparisonOptions opts, int reps, bool timing,
                 bool trajectories, bool serial) {
  opts.split = split_flags.rule();
  EvaluationReport report;
  if (data.input.empty()) {
    ExperimentConfig cfg;
    cfg.sim = sim_config(sim, opts.p, opts.s);
    cfg.comparison = opts;
    cfg.replications = reps;
    report = run_experiment(cfg, serial ? Execution::Serial : Execution::Parallel);
  } else {
    if (reps != 1) throw Error(ErrorKind::InvalidArgument, "--reps needs simulated data");
    if (serial) opts.execution = Execution::Serial;
    report = evaluate_series(load_input(data, opts.split), opts, describe_input(data));
  }

  std::cout << report_to_table(report);
  if (timing) {
    std::cout << "timing (ms per replication)\n";
    for (const auto& s : report.summary) {
      std::cout << "  " << std::left << std::setw(16) << forecast_method_name(s.method)
                << std::right << std::fixed << std::setprecision(3) << " median "
                << s.timing.median << "  mean " << s.timing.mean << '\n';
    }
  }
  if (!report.ordering_ok() || !report.positivity_ok()) {
    std::cout << "warning: trajectory invariant violated (ordering "
              << report.ordering_ok() << ", positivity " << report.positivity_ok() << ")\n";
  }
  if (!out.json.empty()) {
    const JsonOptions jo{.trajectories = trajectories, .timing = timing};
    write_text(out.json, report_to_json(report, jo).dump(2) + "\n");
  }
  if (!out.csv.empty()) write_text(out.csv, report_to_csv(report, timing));
  return kOk;
}

int run_bench(BenchConfig cfg, const SimFlags& sim, const SplitFlags& split_flags,
              const OutputFlags& out, bool parallel) {
  cfg.sim = sim_config(sim, cfg.p, cfg.s);
  cfg.split = split_flags.rule();
  if (!cfg.split.train_len && !cfg.split.T1) cfg.split.train_len = 76;
  cfg.execution = parallel ? Execution::Parallel : Execution::Serial;
  const BenchResult r = bench_timing(cfg);
  std::cout << bench_to_table(r);
  std::cout << "online/rolling mean ratio: gradient " << std::setprecision(3)
            << r.gradient.mean / r.rolling.mean << ", newton " << r.newton.mean / r.rolling.mean
            << '\n';
  if (!out.json.empty()) write_text(out.json, bench_to_json(r).dump(2) + "\n");
  if (!out.csv.empty()) {
    std::ostringstream os;
    os << std::setprecision(17) << "procedure,min_ms,q1_ms,mean_ms,median_ms,q3_ms,max_ms\n";
    auto row = [&](const char* name, const TimingSummary& t) {
      os << name << ',' << t.min << ',' << t.q1 << ',' << t.mean << ',' << t.median << ','
         << t.q3 << ',' << t.max << '\n';
    };
    row("rolling", r.rolling);
    row("gradient", r.gradient);
    row("newton", r.newton);
    write_text(out.csv, os.str());
  }
  return kOk;
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Usage: return kUsage;
    case ErrorCategory::Data: return kData;
    case ErrorCategory::Numerical: return kNumerical;
  }
  return kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online lasso AR-X forecasting with adaptive penalties"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "onlasso 0.1.0");

  int p = 12;
  int s = 12;
  Index grid_size = 50;
  SimFlags sim;
  DataFlags data;
  SplitFlags split;
  OutputFlags out;
  auto add_lags = [&](CLI::App* cmd) {
    cmd->add_option("--p", p, "Target lags")->check(CLI::NonNegativeNumber);
    cmd->add_option("--s", s, "Exogenous lags")->check(CLI::NonNegativeNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Write a simulated sparse AR-X data set as CSV");
  add_lags(simulate);
  add_sim_flags(simulate, sim);
  std::string sim_output;
  std::string sim_truth;
  simulate->add_option("-o,--output", sim_output, "CSV path (default stdout)");
  simulate->add_option("--truth", sim_truth, "Write the true coefficients as JSON");

  auto* tune = app.add_subcommand("tune", "Rolling validation over the penalty grid");
  add_lags(tune);
  add_sim_flags(tune, sim);
  add_data_flags(tune, data);
  add_split_flags(tune, split);
  add_output_flags(tune, out);
  tune->add_option("--grid-size", grid_size, "Grid points")->check(CLI::Range(2, 100000));
  bool serial = false;
  tune->add_flag("--serial", serial, "Run grid points serially");

  auto* evaluate = app.add_subcommand("evaluate", "Compare forecasting methods");
  add_lags(evaluate);
  add_sim_flags(evaluate, sim);
  add_data_flags(evaluate, data);
  add_split_flags(evaluate, split);
  add_output_flags(evaluate, out);
  evaluate->add_option("--grid-size", grid_size, "Grid points")->check(CLI::Range(2, 100000));
  double eta = 0.1;
  evaluate->add_option("--eta", eta, "Gradient learning rate");
  std::string rule;
  evaluate->add_option("--rule", rule, "Single rule: gradient, newton, static, rolling-window");
  std::vector<std::string> methods;
  evaluate->add_option("--methods", methods,
                       "Methods: static,rolling-window,gradient,newton,mean,random-walk,aic,bic")
      ->delimiter(',');
  int reps = 1;
  evaluate->add_option("--reps", reps, "Replications (simulated data)")->check(CLI::PositiveNumber);
  bool timing = false;
  evaluate->add_flag("--timing", timing, "Include timings (reports are then not reproducible)");
  bool no_traj = false;
  evaluate->add_flag("--no-trajectories", no_traj, "Omit per-origin errors and penalties");
  evaluate->add_flag("--serial", serial, "Disable OpenMP parallelism");

  auto* bench = app.add_subcommand("bench", "Time rolling validation against the online rules");
  add_lags(bench);
  add_sim_flags(bench, sim);
  add_split_flags(bench, split);
  add_output_flags(bench, out);
  bench->add_option("--grid-size", grid_size, "Grid points")->check(CLI::Range(2, 100000));
  BenchConfig bcfg;
  bench->add_option("--eta", bcfg.eta, "Gradient learning rate");
  bench->add_option("--iterations", bcfg.iterations, "Timed iterations");
  bench->add_option("--warmup", bcfg.warmup, "Untimed warmup iterations (>= 3)");
  bool parallel = false;
  bench->add_flag("--parallel", parallel, "Parallel grid in rolling validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, p, s, sim_output, sim_truth);
    if (*tune) return run_tune(sim, data, split, out, p, s, grid_size, serial);
    if (*evaluate) {
      ComparisonOptions opts;
      opts.p = p;
      opts.s = s;
      opts.grid_size = grid_size;
      opts.eta = eta;
      opts.methods = chosen_methods(methods, rule);
      if (serial) opts.execution = Execution::Serial;
      return run_evaluate(sim, data, split, out, opts, reps, timing, !no_traj, serial);
    }
    if (*bench) {
      bcfg.p = p;
      bcfg.s = s;
      bcfg.grid_size = grid_size;
      return run_bench(bcfg, sim, split, out, parallel);
    }
  } catch (const Error& e) {
    std::cerr << "onlasso: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "onlasso: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
