// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "onlasso/errors.hpp"

namespace onlasso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::nan("");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MethodOutcome from_trajectory(ForecastMethod m, const PenaltyTrajectory& traj) {
  MethodOutcome out;
  out.method = m;
  out.msfe = traj.msfe();
  out.fallbacks = traj.fallbacks();
  for (const auto& e : traj.entries) {
    out.lambdas.push_back(e.lambda);
    out.errors.push_back(e.sq_error);
  }
  return out;
}

bool ordering_holds(const PenaltyTrajectory& traj) {
  return std::all_of(traj.entries.begin(), traj.entries.end(),
                     [](const TrajectoryEntry& e) { return e.error_seq < e.update_seq; });
}

bool positivity_holds(const PenaltyTrajectory& traj) {
  return std::all_of(traj.entries.begin(), traj.entries.end(),
                     [](const TrajectoryEntry& e) { return e.lambda > 0.0; });
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

MethodOutcome naive_baseline(ForecastMethod m, const SeriesSet& series,
                             const SplitConfig& split) {
  MethodOutcome out;
  out.method = m;
  const Index T = series.length();
  for (Index t = split.T2; t < T; ++t) {
    const std::span<const double> past(series.y.data(), static_cast<std::size_t>(t));
    const double f = m == ForecastMethod::SampleMean ? sample_mean_forecast(past)
                                                     : random_walk_forecast(past);
    const double e = series.y(t) - f;
    out.errors.push_back(e * e);
  }
  out.msfe = mean_of(out.errors);
  return out;
}

// Order chosen once on the data through T2, then re-estimated by OLS on an
// expanding window at every origin.
MethodOutcome ic_baseline(ForecastMethod m, const SeriesSet& series, int p_max, int s_max,
                          const SplitConfig& split) {
  const auto crit =
      m == ForecastMethod::AIC ? InformationCriterion::AIC : InformationCriterion::BIC;
  MethodOutcome out;
  out.method = m;
  out.order = ic_lag_select(series.head(split.T2), p_max, s_max, crit);
  const LaggedDesign d = build_lag_design(series, out.order.p, out.order.s);
  for (Index t = split.T2; t < d.last_time(); ++t) {
    const Index n = d.rows_through(t);
    const Eigen::VectorXd phi = fit_ols(d.Z.topRows(n), d.y.head(n));
    const Index r = d.row_of(t + 1);
    const double e = d.y(r) - d.Z.row(r).dot(phi);
    out.errors.push_back(e * e);
  }
  out.msfe = mean_of(out.errors);
  return out;
}

void append_timing_json(nlohmann::json& j, const TimingSummary& t) {
  j = {{"min_ms", t.min},   {"q1_ms", t.q1},   {"median_ms", t.median},
       {"mean_ms", t.mean}, {"q3_ms", t.q3},   {"max_ms", t.max},
       {"samples", t.samples}};
}

}  // namespace

std::string_view forecast_method_name(ForecastMethod m) {
  switch (m) {
    case ForecastMethod::Static: return "static";
    case ForecastMethod::RollingWindow: return "rolling-window";
    case ForecastMethod::Gradient: return "gradient";
    case ForecastMethod::Newton: return "newton";
    case ForecastMethod::SampleMean: return "mean";
    case ForecastMethod::RandomWalk: return "random-walk";
    case ForecastMethod::AIC: return "aic";
    case ForecastMethod::BIC: return "bic";
  }
  return "unknown";
}

ForecastMethod parse_forecast_method(std::string_view name) {
  for (ForecastMethod m : all_forecast_methods()) {
    if (forecast_method_name(m) == name) return m;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::vector<ForecastMethod> all_forecast_methods() {
  return {ForecastMethod::Static,     ForecastMethod::RollingWindow,
          ForecastMethod::Gradient,   ForecastMethod::Newton,
          ForecastMethod::SampleMean, ForecastMethod::RandomWalk,
          ForecastMethod::AIC,        ForecastMethod::BIC};
}

SplitConfig SplitRule::resolve(Index T) const {
  if (train_frac && !(*train_frac > 0.0 && *train_frac < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
  }
  SplitConfig s = SplitConfig::thirds(T);
  if (T2) {
    s.T2 = *T2;
  } else if (train_frac) {
    s.T2 = static_cast<Index>(std::floor(*train_frac * static_cast<double>(T)));
  }
  if (T1) {
    s.T1 = *T1;
  } else if (train_len) {
    s.T1 = s.T2 - *train_len;
  } else if (T2 || train_frac) {
    s.T1 = s.T2 / 2;
  }
  return s;
}

ReplicationResult compare_methods(const SeriesSet& series, const ComparisonOptions& opts,
                                  std::uint64_t seed) {
  ReplicationResult rep;
  rep.seed = seed;
  rep.split = opts.split.resolve(series.length());
  const LaggedDesign design = build_lag_design(series, opts.p, opts.s);
  rep.split.validate(design);
  rep.features = design.features();

  const PenaltyGrid grid = default_grid_through(design, rep.split.T2, opts.grid_size);
  const ValidationResult val = rolling_validate(design, grid, rep.split, opts.execution);
  rep.lambda_hat = val.lambda;

  std::vector<ForecastMethod> methods{ForecastMethod::Static};
  for (ForecastMethod m : opts.methods)
    if (m != ForecastMethod::Static) methods.push_back(m);

  const OnlineOptions online{.eta = opts.eta, .homotopy = {}};
  for (ForecastMethod m : methods) {
    const auto start = Clock::now();
    MethodOutcome out;
    try {
      std::optional<PenaltyTrajectory> traj;
      switch (m) {
        case ForecastMethod::Static:
          traj = static_evaluate(design, val.lambda, rep.split);
          break;
        case ForecastMethod::RollingWindow:
          traj = rolling_window_evaluate(design, grid, rep.split, opts.execution);
          break;
        case ForecastMethod::Gradient:
          traj = online_evaluate(design, Method::OnlineGradient, val.lambda, rep.split, online);
          break;
        case ForecastMethod::Newton:
          traj = online_evaluate(design, Method::OnlineNewton, val.lambda, rep.split, online);
          break;
        case ForecastMethod::SampleMean:
        case ForecastMethod::RandomWalk:
          out = naive_baseline(m, series, rep.split);
          break;
        case ForecastMethod::AIC:
        case ForecastMethod::BIC:
          out = ic_baseline(m, series, opts.p, opts.s, rep.split);
          break;
      }
      if (traj) {
        out = from_trajectory(m, *traj);
        rep.ordering_ok = rep.ordering_ok && ordering_holds(*traj);
        rep.positivity_ok = rep.positivity_ok && positivity_holds(*traj);
      }
    } catch (const Error& e) {
      throw e.in_context("method " + std::string(forecast_method_name(m)));
    }
    out.seconds = seconds_since(start);
    rep.methods.push_back(std::move(out));
  }
  const double base = rep.methods.front().msfe;
  for (auto& m : rep.methods) m.relative = m.msfe / base;
  return rep;
}

TimingSummary TimingSummary::from_samples(std::vector<double> ms) {
  TimingSummary t;
  t.samples = static_cast<int>(ms.size());
  if (ms.empty()) return t;
  std::sort(ms.begin(), ms.end());
  t.min = ms.front();
  t.max = ms.back();
  t.q1 = quantile(ms, 0.25);
  t.median = quantile(ms, 0.5);
  t.q3 = quantile(ms, 0.75);
  t.mean = mean_of(ms);
  return t;
}

bool EvaluationReport::ordering_ok() const {
  return std::all_of(replications.begin(), replications.end(),
                     [](const ReplicationResult& r) { return r.ordering_ok; });
}

bool EvaluationReport::positivity_ok() const {
  return std::all_of(replications.begin(), replications.end(),
                     [](const ReplicationResult& r) { return r.positivity_ok; });
}

const MethodSummary& EvaluationReport::method(ForecastMethod m) const {
  for (const auto& s : summary)
    if (s.method == m) return s;
  throw Error(ErrorKind::InvalidArgument,
              "method " + std::string(forecast_method_name(m)) + " not in report");
}

EvaluationReport summarize(std::vector<ReplicationResult> reps, ComparisonOptions opts,
                           std::string source) {
  EvaluationReport report;
  report.source = std::move(source);
  report.options = std::move(opts);
  report.replications = std::move(reps);
  if (report.replications.empty()) return report;
  const auto& first = report.replications.front().methods;
  for (std::size_t k = 0; k < first.size(); ++k) {
    MethodSummary s;
    s.method = first[k].method;
    std::vector<double> rel, msfe, ms;
    for (const auto& r : report.replications) {
      rel.push_back(r.methods[k].relative);
      msfe.push_back(r.methods[k].msfe);
      ms.push_back(1e3 * r.methods[k].seconds);
    }
    s.mean_relative = mean_of(rel);
    s.mean_msfe = mean_of(msfe);
    if (rel.size() > 1) {
      double ss = 0.0;
      for (double v : rel) ss += (v - s.mean_relative) * (v - s.mean_relative);
      s.se_relative = std::sqrt(ss / static_cast<double>(rel.size() - 1) /
                                static_cast<double>(rel.size()));
    }
    s.timing = TimingSummary::from_samples(std::move(ms));
    report.summary.push_back(s);
  }
  return report;
}

EvaluationReport run_experiment(const ExperimentConfig& cfg, Execution replications) {
  if (cfg.replications < 1) throw Error(ErrorKind::InvalidArgument, "need at least one replication");
  const auto n = static_cast<std::size_t>(cfg.replications);
  std::vector<ReplicationResult> reps(n);
  std::vector<std::exception_ptr> errors(n);
  ComparisonOptions inner = cfg.comparison;
  if (replications == Execution::Parallel) inner.execution = Execution::Serial;

#pragma omp parallel for schedule(dynamic) if (replications == Execution::Parallel)
  for (int r = 0; r < cfg.replications; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    SimConfig sim = cfg.sim;
    sim.seed = cfg.sim.seed + static_cast<std::uint64_t>(r);
    try {
      try {
        reps[ur] = compare_methods(simulate_arx(sim).first, inner, sim.seed);
      } catch (const Error& e) {
        throw e.in_context("replication " + std::to_string(r) + " (seed " +
                           std::to_string(sim.seed) + ")");
      }
    } catch (...) {
      errors[ur] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::ostringstream src;
  src << "simulate k=" << cfg.sim.k << " p=" << cfg.sim.p << " s=" << cfg.sim.s
      << " T=" << cfg.sim.T << " density=" << cfg.sim.density
      << " seed=" << cfg.sim.seed << " reps=" << cfg.replications;
  return summarize(std::move(reps), cfg.comparison, src.str());
}

EvaluationReport evaluate_series(const SeriesSet& series, const ComparisonOptions& opts,
                                 std::string source) {
  std::vector<ReplicationResult> reps{compare_methods(series, opts)};
  return summarize(std::move(reps), opts, std::move(source));
}

nlohmann::json report_to_json(const EvaluationReport& report, const JsonOptions& opts) {
  using nlohmann::json;
  const auto& o = report.options;
  json j;
  j["source"] = report.source;
  j["options"] = {{"p", o.p},
                  {"s", o.s},
                  {"grid_size", o.grid_size},
                  {"eta", o.eta},
                  {"replications", report.replications.size()}};
  json summary = json::array();
  for (const auto& s : report.summary) {
    json m = {{"method", forecast_method_name(s.method)},
              {"relative_msfe", s.mean_relative},
              {"relative_msfe_se", s.se_relative},
              {"msfe", s.mean_msfe}};
    if (opts.timing) append_timing_json(m["timing"], s.timing);
    summary.push_back(m);
  }
  j["summary"] = summary;
  j["ordering_ok"] = report.ordering_ok();
  j["positivity_ok"] = report.positivity_ok();

  json reps = json::array();
  for (const auto& r : report.replications) {
    json jr = {{"seed", r.seed},
               {"T1", r.split.T1},
               {"T2", r.split.T2},
               {"features", r.features},
               {"lambda_hat", r.lambda_hat}};
    json methods = json::array();
    for (const auto& m : r.methods) {
      json jm = {{"method", forecast_method_name(m.method)},
                 {"msfe", m.msfe},
                 {"relative_msfe", m.relative},
                 {"fallbacks", m.fallbacks}};
      if (m.method == ForecastMethod::AIC || m.method == ForecastMethod::BIC) {
        jm["order"] = {{"p", m.order.p}, {"s", m.order.s}};
      }
      if (opts.trajectories) {
        jm["squared_errors"] = m.errors;
        if (!m.lambdas.empty()) jm["lambda"] = m.lambdas;
      }
      if (opts.timing) jm["seconds"] = m.seconds;
      methods.push_back(jm);
    }
    jr["methods"] = methods;
    reps.push_back(jr);
  }
  j["replications"] = reps;
  return j;
}

std::string report_to_csv(const EvaluationReport& report, bool timing) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "method,relative_msfe,relative_msfe_se,msfe";
  if (timing) os << ",min_ms,q1_ms,median_ms,mean_ms,q3_ms,max_ms";
  os << '\n';
  for (const auto& s : report.summary) {
    os << forecast_method_name(s.method) << ',' << s.mean_relative << ',' << s.se_relative
       << ',' << s.mean_msfe;
    if (timing) {
      os << ',' << s.timing.min << ',' << s.timing.q1 << ',' << s.timing.median << ','
         << s.timing.mean << ',' << s.timing.q3 << ',' << s.timing.max;
    }
    os << '\n';
  }
  return os.str();
}

std::string report_to_table(const EvaluationReport& report) {
  std::ostringstream os;
  os << report.source << '\n';
  if (!report.replications.empty()) {
    const auto& r = report.replications.front();
    os << "features " << r.features << ", T1 " << r.split.T1 << ", T2 " << r.split.T2 << '\n';
  }
  os << std::left << std::setw(16) << "method" << std::right << std::setw(14)
     << "rel. MSFE" << std::setw(12) << "(se)" << std::setw(14) << "MSFE" << '\n';
  os << std::fixed;
  for (const auto& s : report.summary) {
    os << std::left << std::setw(16) << forecast_method_name(s.method) << std::right
       << std::setw(14) << std::setprecision(4) << s.mean_relative << std::setw(12)
       << s.se_relative << std::setw(14) << s.mean_msfe << '\n';
  }
  return os.str();
}

BenchResult bench_timing(const BenchConfig& cfg) {
  if (cfg.warmup < 3) throw Error(ErrorKind::InvalidArgument, "need at least 3 warmup runs");
  if (cfg.iterations < 1) throw Error(ErrorKind::InvalidArgument, "need at least 1 iteration");
  const SeriesSet series = simulate_arx(cfg.sim).first;
  const LaggedDesign design = build_lag_design(series, cfg.p, cfg.s);
  BenchResult res;
  res.split = cfg.split.resolve(series.length());
  res.split.validate(design);
  const PenaltyGrid grid = default_grid_through(design, res.split.T2, cfg.grid_size);
  res.lambda_start = rolling_validate(design, grid, res.split, cfg.execution).lambda;

  auto time_runs = [&](auto&& body) {
    for (int i = 0; i < cfg.warmup; ++i) body();
    std::vector<double> ms;
    ms.reserve(static_cast<std::size_t>(cfg.iterations));
    for (int i = 0; i < cfg.iterations; ++i) {
      const auto start = Clock::now();
      body();
      ms.push_back(1e3 * seconds_since(start));
    }
    return TimingSummary::from_samples(std::move(ms));
  };

  res.rolling = time_runs([&] { rolling_validate(design, grid, res.split, cfg.execution); });
  const OnlineOptions online{.eta = cfg.eta, .homotopy = {}};
  for (Method rule : {Method::OnlineGradient, Method::OnlineNewton}) {
    auto run = [&] {
      const auto traj = online_evaluate(design, rule, res.lambda_start, res.split.T1,
                                        res.split.T2, online);
      res.ordering_ok = res.ordering_ok && ordering_holds(traj);
      res.positivity_ok = res.positivity_ok && positivity_holds(traj);
    };
    (rule == Method::OnlineGradient ? res.gradient : res.newton) = time_runs(run);
  }
  return res;
}

std::string bench_to_table(const BenchResult& r) {
  std::ostringstream os;
  os << "period [" << r.split.T1 << ", " << r.split.T2 << "), start lambda "
     << r.lambda_start << '\n';
  os << std::left << std::setw(20) << "procedure" << std::right;
  for (const char* h : {"min", "lq", "mean", "median", "uq", "max"}) os << std::setw(11) << h;
  os << "  (ms)\n" << std::fixed << std::setprecision(3);
  auto row = [&](const char* name, const TimingSummary& t) {
    os << std::left << std::setw(20) << name << std::right << std::setw(11) << t.min
       << std::setw(11) << t.q1 << std::setw(11) << t.mean << std::setw(11) << t.median
       << std::setw(11) << t.q3 << std::setw(11) << t.max << '\n';
  };
  row("rolling validation", r.rolling);
  row("online gradient", r.gradient);
  row("online newton", r.newton);
  return os.str();
}

nlohmann::json bench_to_json(const BenchResult& r) {
  nlohmann::json j;
  j["T1"] = r.split.T1;
  j["T2"] = r.split.T2;
  j["lambda_start"] = r.lambda_start;
  append_timing_json(j["rolling"], r.rolling);
  append_timing_json(j["gradient"], r.gradient);
  append_timing_json(j["newton"], r.newton);
  j["ordering_ok"] = r.ordering_ok;
  j["positivity_ok"] = r.positivity_ok;
  return j;
}

}  // namespace onlasso
