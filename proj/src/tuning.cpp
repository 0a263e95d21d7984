// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "onlasso/errors.hpp"

namespace onlasso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_origins(const LaggedDesign& d, Index t_begin, Index t_end) {
  if (t_begin < d.first_index || t_end > d.last_time() || t_begin >= t_end) {
    throw Error(ErrorKind::InvalidArgument,
                "origin range [" + std::to_string(t_begin) + ", " +
                    std::to_string(t_end) + ") outside the design times [" +
                    std::to_string(d.first_index) + ", " +
                    std::to_string(d.last_time()) + "]");
  }
}

CrossProducts data_through(const LaggedDesign& d, Index t) {
  const Index n = d.rows_through(t);
  return CrossProducts::from_design(d.Z.topRows(n), d.y.head(n));
}

Eigen::VectorXd active_part(const PathState& s, const Eigen::VectorXd& full) {
  Eigen::VectorXd out(static_cast<Index>(s.active.size()));
  for (std::size_t a = 0; a < s.active.size(); ++a) out(static_cast<Index>(a)) = full(s.active[a]);
  return out;
}

Eigen::VectorXd active_signs(const PathState& s) {
  Eigen::VectorXd v(static_cast<Index>(s.active.size()));
  for (std::size_t a = 0; a < s.active.size(); ++a)
    v(static_cast<Index>(a)) = s.signs[static_cast<std::size_t>(s.active[a])];
  return v;
}

double clamp_log_step(double step) {
  return std::clamp(step, -kMaxLogStep, kMaxLogStep);
}

}  // namespace

SplitConfig SplitConfig::thirds(Index T) { return {T / 3, (2 * T) / 3}; }

SplitConfig SplitConfig::with_training_length(Index T, Index train_len) {
  const Index T2 = (2 * T) / 3;
  return {T2 - train_len, T2};
}

void SplitConfig::validate(const LaggedDesign& design) const {
  if (!(design.first_index < T1 && T1 < T2 && T2 <= design.last_time())) {
    throw Error(ErrorKind::InvalidArgument,
                "split needs " + std::to_string(design.first_index) + " < T1 (" +
                    std::to_string(T1) + ") < T2 (" + std::to_string(T2) +
                    ") <= T (" + std::to_string(design.last_time()) + ")");
  }
}

PenaltyGrid PenaltyGrid::from_values(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidArgument, "empty penalty grid");
  std::sort(values.begin(), values.end(), std::greater<>());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw Error(ErrorKind::InvalidArgument, "grid penalties must be positive and finite");
    }
    if (i > 0 && values[i] == values[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "repeated grid penalty");
    }
  }
  return PenaltyGrid{std::move(values)};
}

PenaltyGrid default_grid(const CrossProducts& xp, Index n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  const double lmax = lambda_max(xp);
  if (!(lmax > 0.0)) {
    throw Error(ErrorKind::DegenerateDesign, "lambda_max is zero");
  }
  PenaltyGrid g;
  g.values.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    g.values[static_cast<std::size_t>(i)] =
        lmax * std::pow(10.0, -3.0 * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.values.front() = lmax;
  g.values.back() = 1e-3 * lmax;
  return g;
}

PenaltyGrid default_grid_through(const LaggedDesign& design, Index through, Index n) {
  if (through < design.first_index || through > design.last_time()) {
    throw Error(ErrorKind::InvalidArgument,
                "no design rows through time " + std::to_string(through));
  }
  return default_grid(data_through(design, through), n);
}

PenaltyGrid default_grid(const LaggedDesign& design, Index n) {
  return default_grid(CrossProducts::from_design(design.Z, design.y), n);
}

GridPaths grid_error_paths(const LaggedDesign& design, const PenaltyGrid& grid,
                           Index t_begin, Index t_end, Execution exec,
                           const HomotopyOptions& opts) {
  check_origins(design, t_begin, t_end);
  if (grid.values.empty()) throw Error(ErrorKind::InvalidArgument, "empty penalty grid");
  const Index n = grid.size();
  const Index origins = t_end - t_begin;

  GridPaths out;
  out.t_begin = t_begin;
  out.forecast = Eigen::MatrixXd::Zero(n, origins);
  out.sq_error = Eigen::MatrixXd::Zero(n, origins);
  out.actual.resize(origins);
  out.fallbacks.assign(static_cast<std::size_t>(n), 0);
  out.failed.assign(static_cast<std::size_t>(n), false);

  CrossProducts xp = data_through(design, t_begin);

  // Initial states by one pass down the grid.
  std::vector<PathState> states(static_cast<std::size_t>(n));
  {
    PathState s = PathState::at_zero(xp);
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      try {
        const auto rep = lambda_path(xp, s, grid.values[ui], opts);
        out.fallbacks[ui] += rep.fallback ? 1 : 0;
        states[ui] = s;
      } catch (const Error&) {
        out.failed[ui] = true;
        s = PathState::at_zero(xp);
      }
    }
  }

  std::vector<std::exception_ptr> fatal(static_cast<std::size_t>(n));
  for (Index c = 0; c < origins; ++c) {
    const Observation obs = observation_at(design, t_begin + c + 1);
    out.actual(c) = obs.y;
    const bool advance = c + 1 < origins;

#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (out.failed[ui] || fatal[ui]) {
        out.forecast(i, c) = std::numeric_limits<double>::quiet_NaN();
        out.sq_error(i, c) = kInf;
        continue;
      }
      const double f = states[ui].predict(obs.z);
      out.forecast(i, c) = f;
      out.sq_error(i, c) = (obs.y - f) * (obs.y - f);
      if (!advance) continue;
      try {
        const auto rep = reclasso_step(xp, states[ui], obs.y, obs.z, grid.values[ui], opts);
        out.fallbacks[ui] += rep.fallback ? 1 : 0;
      } catch (const Error&) {
        out.failed[ui] = true;
      } catch (...) {
        fatal[ui] = std::current_exception();
      }
    }
    for (const auto& e : fatal)
      if (e) std::rethrow_exception(e);
    if (advance) xp.absorb(obs.y, obs.z);
  }
  return out;
}

Index argmin_msfe(const Eigen::Ref<const Eigen::VectorXd>& msfe) {
  Index best = 0;
  for (Index i = 1; i < msfe.size(); ++i) {
    if (msfe(i) < msfe(best)) best = i;
  }
  return best;
}

ValidationResult rolling_validate(const LaggedDesign& design, const PenaltyGrid& grid,
                                  const SplitConfig& split, Execution exec,
                                  const HomotopyOptions& opts) {
  split.validate(design);
  const GridPaths paths = grid_error_paths(design, grid, split.T1, split.T2, exec, opts);
  ValidationResult r;
  r.msfe = paths.sq_error.rowwise().mean();
  r.index = argmin_msfe(r.msfe);
  if (!std::isfinite(r.msfe(r.index))) {
    throw Error(ErrorKind::NoConvergence, "every grid penalty failed during validation");
  }
  r.lambda = grid.values[static_cast<std::size_t>(r.index)];
  return r;
}

Observation observation_at(const LaggedDesign& design, Index t) {
  if (t < design.first_index || t > design.last_time()) {
    throw Error(ErrorKind::InvalidArgument,
                "no design row for time " + std::to_string(t));
  }
  const Index r = design.row_of(t);
  return {design.y(r), design.Z.row(r).transpose()};
}

double prediction_error(const ActiveModel& model, const Observation& obs) {
  const double e = obs.y - model.predict(obs.z);
  return e * e;
}

double grad_log_lambda(const ActiveModel& model, const Observation& obs) {
  const PathState& s = model.state();
  if (s.active.empty()) return 0.0;
  const Eigen::VectorXd za = active_part(s, obs.z);
  const double b = za.dot(s.ginv.inv() * active_signs(s));
  const double resid = za.dot(s.phi_active) - obs.y;
  return -2.0 * s.lambda * b * resid;
}

Eigen::VectorXd newton_sigma(const ActiveModel& model) {
  const PathState& s = model.state();
  if (s.active.empty()) return Eigen::VectorXd();
  return s.ginv.inv() *
         (active_part(s, model.data().xty) - 2.0 * s.lambda * active_signs(s));
}

double gradient_update(double lambda, double grad, double eta) {
  return lambda * std::exp(clamp_log_step(-eta * grad));
}

NewtonStep newton_update(const ActiveModel& model, const Observation& obs) {
  const PathState& s = model.state();
  const double lambda = s.lambda;
  if (s.active.empty()) return {lambda, true};
  const Eigen::VectorXd za = active_part(s, obs.z);
  const double resid = za.dot(s.phi_active) - obs.y;
  const double denom = za.dot(newton_sigma(model)) - obs.y;
  if (!(std::abs(denom) > kHessianGuard)) return {lambda, true};
  const double ratio = resid / denom;
  if (ratio == 0.0) return {lambda, false};
  // H = -2 lambda b (z'Sigma - y); exp(+ratio) = exp(grad / H) only moves
  // downhill when H < 0.
  const double b = za.dot(s.ginv.inv() * active_signs(s));
  const double hessian = -2.0 * lambda * b * denom;
  if (!(hessian < 0.0)) return {lambda, true};
  return {lambda * std::exp(clamp_log_step(ratio)), false};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Static: return "static";
    case Method::RollingWindow: return "rolling-window";
    case Method::OnlineGradient: return "gradient";
    case Method::OnlineNewton: return "newton";
  }
  return "unknown";
}

double PenaltyTrajectory::msfe() const {
  if (entries.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& e : entries) sum += e.sq_error;
  return sum / static_cast<double>(entries.size());
}

int PenaltyTrajectory::fallbacks() const {
  int n = 0;
  for (const auto& e : entries) n += e.fallback ? 1 : 0;
  return n;
}

PenaltyTrajectory online_evaluate(const LaggedDesign& design, Method rule,
                                  double lambda_init, Index t_begin, Index t_end,
                                  const OnlineOptions& opts) {
  check_origins(design, t_begin, t_end);
  if (rule == Method::RollingWindow) {
    throw Error(ErrorKind::InvalidArgument, "rolling-window needs a penalty grid");
  }
  if (!(lambda_init > 0.0) || !std::isfinite(lambda_init)) {
    throw Error(ErrorKind::InvalidArgument, "initial penalty must be positive");
  }
  if (!(opts.eta >= 0.0)) throw Error(ErrorKind::InvalidArgument, "eta must be >= 0");

  PenaltyTrajectory traj;
  traj.method = rule;
  traj.entries.reserve(static_cast<std::size_t>(t_end - t_begin));
  ActiveModel model =
      ActiveModel::fit(data_through(design, t_begin), lambda_init, opts.homotopy);
  double lambda = lambda_init;
  std::uint64_t seq = 0;
  for (Index t = t_begin; t < t_end; ++t) {
    const Observation obs = observation_at(design, t + 1);
    TrajectoryEntry e;
    e.t = t;
    e.lambda = lambda;
    e.forecast = model.predict(obs.z);
    e.actual = obs.y;
    e.sq_error = (obs.y - e.forecast) * (obs.y - e.forecast);
    e.error_seq = ++seq;

    double next = lambda;
    if (rule == Method::OnlineGradient) {
      next = gradient_update(lambda, grad_log_lambda(model, obs), opts.eta);
    } else if (rule == Method::OnlineNewton) {
      const NewtonStep step = newton_update(model, obs);
      next = step.lambda;
      e.skipped = step.skipped;
    }
    e.update_seq = ++seq;

    if (t + 1 < t_end) {
      e.fallback = reclasso_update(model, obs.y, obs.z, next, opts.homotopy).fallback;
    }
    lambda = next;
    traj.entries.push_back(e);
  }
  return traj;
}

PenaltyTrajectory online_evaluate(const LaggedDesign& design, Method rule,
                                  double lambda_init, const SplitConfig& split,
                                  const OnlineOptions& opts) {
  split.validate(design);
  return online_evaluate(design, rule, lambda_init, split.T2, design.last_time(), opts);
}

PenaltyTrajectory static_evaluate(const LaggedDesign& design, double lambda,
                                  const SplitConfig& split,
                                  const HomotopyOptions& opts) {
  return online_evaluate(design, Method::Static, lambda, split, {.eta = 0.0, .homotopy = opts});
}

PenaltyTrajectory rolling_window_evaluate(const LaggedDesign& design,
                                          const PenaltyGrid& grid,
                                          const SplitConfig& split, Execution exec,
                                          const HomotopyOptions& opts) {
  split.validate(design);
  if (split.T2 >= design.last_time()) {
    throw Error(ErrorKind::InvalidArgument, "empty evaluation period");
  }
  const GridPaths paths =
      grid_error_paths(design, grid, split.T1, design.last_time(), exec, opts);
  const Index width = split.T2 - split.T1;

  PenaltyTrajectory traj;
  traj.method = Method::RollingWindow;
  std::uint64_t seq = 0;
  for (Index t = split.T2; t < design.last_time(); ++t) {
    const Index c = t - split.T1;
    const Eigen::VectorXd msfe = paths.sq_error.middleCols(c - width, width).rowwise().mean();
    const Index i = argmin_msfe(msfe);
    if (!std::isfinite(msfe(i))) {
      throw Error(ErrorKind::NoConvergence, "every grid penalty failed");
    }
    TrajectoryEntry e;
    e.t = t;
    e.lambda = grid.values[static_cast<std::size_t>(i)];
    e.forecast = paths.forecast(i, c);
    e.actual = paths.actual(c);
    e.sq_error = paths.sq_error(i, c);
    e.error_seq = ++seq;
    e.update_seq = ++seq;
    traj.entries.push_back(e);
  }
  return traj;
}

}  // namespace onlasso
