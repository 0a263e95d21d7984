// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

#include "onlasso/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "onlasso/errors.hpp"

namespace onlasso {

namespace {

// Events closer than this (relative to the segment scale) are ties, and the
// feature changed by the previous event is not re-triggered inside it.
constexpr double kTieTol = 1e-12;

struct Candidate {
  double t = 0.0;
  TransitionKind kind = TransitionKind::FeatureEnters;
  Index feature = -1;
  Index position = -1;
  int sign = 0;
};

// One path segment, affine in a parameter t in [0, t_end]:
//   phi_A(t) = phi0 + t dphi,  r(t) = r0 + t dr,  lambda(t) = lambda0 + t dlambda.
struct Segment {
  Eigen::VectorXd phi0, dphi;
  Eigen::VectorXd r0, dr;
  double lambda0 = 0.0;
  double dlambda = 0.0;
  double t_end = 0.0;
  double q = 0.0;  // z_A' M z_A, gamma-path only
};

Eigen::VectorXd gather(const Eigen::Ref<const Eigen::VectorXd>& x,
                       const std::vector<Index>& idx) {
  Eigen::VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = x(idx[i]);
  return out;
}

Eigen::VectorXd active_signs(const PathState& st) {
  Eigen::VectorXd v(static_cast<Index>(st.active.size()));
  for (std::size_t i = 0; i < st.active.size(); ++i) {
    v(static_cast<Index>(i)) = st.signs[static_cast<std::size_t>(st.active[i])];
  }
  return v;
}

// G_{:,A} w
Eigen::VectorXd gram_cols_times(const Eigen::MatrixXd& gram,
                                const std::vector<Index>& idx,
                                const Eigen::Ref<const Eigen::VectorXd>& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(gram.rows());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.noalias() += w(static_cast<Index>(i)) * gram.col(idx[i]);
  }
  return out;
}

Eigen::MatrixXd active_gram(const CrossProducts& xp,
                            const std::vector<Index>& idx) {
  const auto na = static_cast<Index>(idx.size());
  Eigen::MatrixXd g(na, na);
  for (Index a = 0; a < na; ++a) {
    for (Index b = 0; b < na; ++b) {
      g(a, b) = xp.gram(idx[static_cast<std::size_t>(a)],
                        idx[static_cast<std::size_t>(b)]);
    }
  }
  return g;
}

// Row data of the appended observation, weighted by mu = gamma^2.
struct Augment {
  double mu = 0.0;
  double y = 0.0;
  const Eigen::Ref<const Eigen::VectorXd>* z = nullptr;
};

void refactorize(const CrossProducts& xp, PathState& st, const Augment& aug,
                 PathReport& rep) {
  Eigen::MatrixXd g = active_gram(xp, st.active);
  if (aug.z != nullptr && aug.mu != 0.0) {
    const Eigen::VectorXd za = gather(*aug.z, st.active);
    g.noalias() += aug.mu * (za * za.transpose());
  }
  st.ginv = GramInverse::from_gram(g);
  ++rep.refactorizations;
}

void maybe_refresh(const CrossProducts& xp, PathState& st, const Augment& aug,
                   PathReport& rep) {
  if (st.ginv.updates_since_refresh() >= kRefreshInterval) {
    refactorize(xp, st, aug, rep);
  }
}

// Closed form phi_A = M (c_A + mu y z_A - lambda v_A).
void solve_active(const CrossProducts& xp, PathState& st, const Augment& aug) {
  Eigen::VectorXd rhs = gather(xp.xty, st.active) - st.lambda * active_signs(st);
  if (aug.z != nullptr && aug.mu != 0.0) {
    rhs.noalias() += aug.mu * aug.y * gather(*aug.z, st.active);
  }
  st.phi_active = st.ginv.inv() * rhs;
}

void apply_event(const CrossProducts& xp, PathState& st, const Candidate& ev,
                 const Augment& aug, PathReport& rep) {
  const auto j = static_cast<std::size_t>(ev.feature);
  if (ev.kind == TransitionKind::FeatureLeaves) {
    const auto pos = ev.position;
    bool refactor = false;
    try {
      st.ginv.remove_feature(pos);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularUpdate) throw;
      refactor = true;
    }
    st.active.erase(st.active.begin() + pos);
    st.signs[j] = 0;
    if (refactor) refactorize(xp, st, aug, rep);
    return;
  }
  Eigen::VectorXd cross(static_cast<Index>(st.active.size()));
  for (std::size_t i = 0; i < st.active.size(); ++i) {
    cross(static_cast<Index>(i)) = xp.gram(st.active[i], ev.feature);
  }
  double self_norm = xp.gram(ev.feature, ev.feature);
  if (aug.z != nullptr && aug.mu != 0.0) {
    const double zj = (*aug.z)(ev.feature);
    cross.noalias() += aug.mu * zj * gather(*aug.z, st.active);
    self_norm += aug.mu * zj * zj;
  }
  st.ginv.add_feature(cross, self_norm);
  st.active.push_back(ev.feature);
  st.signs[j] = ev.sign;
}

std::optional<Candidate> next_event(const Segment& seg, const PathState& st,
                                    Index last_changed,
                                    const std::vector<char>& skip, double eps) {
  std::optional<Candidate> best;
  double t_min = std::numeric_limits<double>::infinity();
  std::vector<Candidate> cands;

  auto consider = [&](double f0, double f1, TransitionKind kind, Index feature,
                      Index position, int sign) {
    // constraint f0 + t f1 >= 0 binds only when it is decreasing
    if (!(f1 < 0.0)) return;
    const double t = std::max(0.0, -f0 / f1);
    if (feature == last_changed && t <= eps) return;
    if (!(t < seg.t_end - eps)) return;
    cands.push_back({t, kind, feature, position, sign});
    t_min = std::min(t_min, t);
  };

  for (std::size_t i = 0; i < st.active.size(); ++i) {
    const Index j = st.active[i];
    const int v = st.signs[static_cast<std::size_t>(j)];
    const auto ii = static_cast<Index>(i);
    consider(v * seg.phi0(ii), v * seg.dphi(ii), TransitionKind::FeatureLeaves,
             j, ii, v);
  }
  const Index m = seg.r0.size();
  for (Index j = 0; j < m; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    if (st.signs[ju] != 0 || skip[ju]) continue;
    consider(seg.lambda0 - seg.r0(j), seg.dlambda - seg.dr(j),
             TransitionKind::FeatureEnters, j, -1, +1);
    consider(seg.lambda0 + seg.r0(j), seg.dlambda + seg.dr(j),
             TransitionKind::FeatureEnters, j, -1, -1);
  }
  // ties: leaves before enters, then lower feature index
  for (const auto& c : cands) {
    if (c.t > t_min + eps) continue;
    if (!best) {
      best = c;
      continue;
    }
    const bool c_leaves = c.kind == TransitionKind::FeatureLeaves;
    const bool b_leaves = best->kind == TransitionKind::FeatureLeaves;
    if (c_leaves != b_leaves) {
      if (c_leaves) best = c;
    } else if (c.feature < best->feature) {
      best = c;
    }
  }
  return best;
}

Segment lambda_segment(const CrossProducts& xp, const PathState& st,
                       double lambda_to) {
  Segment seg;
  const double dir = lambda_to > st.lambda ? 1.0 : -1.0;
  const Eigen::VectorXd v = active_signs(st);
  const Eigen::MatrixXd& M = st.ginv.inv();
  seg.phi0 = M * (gather(xp.xty, st.active) - st.lambda * v);
  const Eigen::VectorXd beta = M * v;
  seg.dphi = -dir * beta;
  seg.r0 = xp.xty - gram_cols_times(xp.gram, st.active, seg.phi0);
  seg.dr = dir * gram_cols_times(xp.gram, st.active, beta);
  seg.lambda0 = st.lambda;
  seg.dlambda = dir;
  seg.t_end = std::abs(lambda_to - st.lambda);
  return seg;
}

// Segment of the gamma-path starting at mu0 = gamma^2, parameterized by
// tau = dmu / (1 + dmu q) in which everything is affine:
//   phi_A(tau) = phi0 + tau e0 M z_A
//   r_j(tau)   = r_j(0) + tau e0 (z_j - Gtilde_jA M z_A)
// with e0 the residual of the new row at mu0 and Gtilde = G + mu0 z z'.
Segment gamma_segment(const CrossProducts& xp, const PathState& st, double mu0,
                      double y_new, const Eigen::Ref<const Eigen::VectorXd>& z) {
  Segment seg;
  const Eigen::MatrixXd& M = st.ginv.inv();
  const Eigen::VectorXd za = gather(z, st.active);
  const Eigen::VectorXd u = M * za;
  const double q = za.dot(u);
  seg.phi0 = M * (gather(xp.xty, st.active) + mu0 * y_new * za -
                  st.lambda * active_signs(st));
  const double e0 = y_new - za.dot(seg.phi0);
  seg.dphi = e0 * u;
  seg.r0 = xp.xty - gram_cols_times(xp.gram, st.active, seg.phi0) + mu0 * e0 * z;
  seg.dr = e0 * ((1.0 - mu0 * q) * z - gram_cols_times(xp.gram, st.active, u));
  seg.lambda0 = st.lambda;
  seg.dlambda = 0.0;
  const double d_end = 1.0 - mu0;
  seg.t_end = d_end / (1.0 + d_end * q);
  seg.q = q;
  return seg;
}

void check_features(const CrossProducts& xp, const PathState& st) {
  if (static_cast<Index>(st.signs.size()) != xp.features()) {
    throw Error(ErrorKind::DimensionMismatch,
                "path state does not match the cross products");
  }
}

void lambda_path_impl(const CrossProducts& xp, PathState& st, double lambda_to,
                      std::vector<TransitionEvent>* log, PathReport& rep) {
  const Index m = xp.features();
  const long max_events = 10L * m;
  std::vector<char> skip(static_cast<std::size_t>(m), 0);
  Index last = -1;
  long events = 0;
  const Augment none{};
  const double eps = kTieTol * std::max({1.0, st.lambda, lambda_to});

  while (st.lambda != lambda_to) {
    const Segment seg = lambda_segment(xp, st, lambda_to);
    const auto ev = next_event(seg, st, last, skip, eps);
    if (!ev) {
      st.lambda = lambda_to;
      solve_active(xp, st, none);
      break;
    }
    st.lambda = seg.lambda0 + seg.dlambda * ev->t;
    try {
      apply_event(xp, st, *ev, none, rep);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateFeature) throw;
      skip[static_cast<std::size_t>(ev->feature)] = 1;
      solve_active(xp, st, none);
      continue;
    }
    maybe_refresh(xp, st, none, rep);
    solve_active(xp, st, none);
    last = ev->feature;
    ++rep.events;
    if (log) log->push_back({ev->kind, ev->feature, st.lambda, ev->sign});
    if (++events > max_events) {
      throw Error(ErrorKind::PathStalled,
                  "lambda-path exceeded " + std::to_string(max_events) +
                      " events");
    }
  }
}

void gamma_path_impl(const CrossProducts& xp, PathState& st, double y_new,
                     const Eigen::Ref<const Eigen::VectorXd>& z,
                     std::vector<TransitionEvent>* log, PathReport& rep) {
  const Index m = xp.features();
  const long max_events = 10L * m;
  std::vector<char> skip(static_cast<std::size_t>(m), 0);
  Index last = -1;
  long events = 0;
  double mu0 = 0.0;

  for (;;) {
    const Segment seg = gamma_segment(xp, st, mu0, y_new, z);
    const double eps = kTieTol * std::max(seg.t_end, 1e-300);
    const auto ev = next_event(seg, st, last, skip, eps);
    const double mu_next =
        ev ? std::min(1.0, mu0 + ev->t / (1.0 - ev->t * seg.q)) : 1.0;

    const Augment at_next{mu_next, y_new, &z};
    try {
      st.ginv.observe(gather(z, st.active), mu_next - mu0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SingularUpdate) throw;
      refactorize(xp, st, at_next, rep);
    }
    mu0 = mu_next;
    if (!ev) {
      solve_active(xp, st, at_next);
      break;
    }
    try {
      apply_event(xp, st, *ev, at_next, rep);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateFeature) throw;
      skip[static_cast<std::size_t>(ev->feature)] = 1;
      continue;
    }
    maybe_refresh(xp, st, at_next, rep);
    last = ev->feature;
    ++rep.events;
    if (log) log->push_back({ev->kind, ev->feature, std::sqrt(mu0), ev->sign});
    if (++events > max_events) {
      throw Error(ErrorKind::PathStalled,
                  "gamma-path exceeded " + std::to_string(max_events) +
                      " events");
    }
  }
}

// Drops active coefficients that ended on the wrong side of zero (an exit
// sitting exactly at the segment end).
void drop_sign_flips(const CrossProducts& xp, PathState& st, const Augment& aug,
                     PathReport& rep) {
  for (std::size_t guard = 0; guard <= st.active.size(); ++guard) {
    Index flip = -1;
    for (std::size_t i = 0; i < st.active.size(); ++i) {
      const int v = st.signs[static_cast<std::size_t>(st.active[i])];
      if (v * st.phi_active(static_cast<Index>(i)) < 0.0) {
        flip = static_cast<Index>(i);
        break;
      }
    }
    if (flip < 0) return;
    Candidate c;
    c.kind = TransitionKind::FeatureLeaves;
    c.feature = st.active[static_cast<std::size_t>(flip)];
    c.position = flip;
    apply_event(xp, st, c, aug, rep);
    solve_active(xp, st, aug);
  }
}

// KKT residual of the state on xp (plus the appended row when aug.z is set).
double state_kkt(const CrossProducts& xp, const PathState& st,
                 const Augment& aug, double* scale) {
  const Eigen::VectorXd phi = st.coefficients();
  Eigen::VectorXd corr = xp.xty - gram_cols_times(xp.gram, st.active, st.phi_active);
  if (aug.z != nullptr && aug.mu != 0.0) {
    const double resid = aug.y - aug.z->dot(phi);
    corr.noalias() += aug.mu * resid * (*aug.z);
    if (scale) *scale = std::max(1.0, (xp.xty + aug.mu * aug.y * (*aug.z)).cwiseAbs().maxCoeff());
  } else if (scale) {
    *scale = std::max(1.0, xp.features() > 0 ? xp.xty.cwiseAbs().maxCoeff() : 0.0);
  }
  return kkt_residual(corr, phi, st.lambda);
}

// Post-check; on failure refactorize once and re-check.
bool verify_or_repair(const CrossProducts& xp, PathState& st, const Augment& aug,
                      const HomotopyOptions& opts, PathReport& rep) {
  drop_sign_flips(xp, st, aug, rep);
  double scale = 1.0;
  if (state_kkt(xp, st, aug, &scale) <= opts.verify_tol * scale) return true;
  refactorize(xp, st, aug, rep);
  solve_active(xp, st, aug);
  drop_sign_flips(xp, st, aug, rep);
  return state_kkt(xp, st, aug, &scale) <= opts.verify_tol * scale;
}

bool recoverable(ErrorKind kind) {
  return kind == ErrorKind::PathStalled || kind == ErrorKind::SingularUpdate ||
         kind == ErrorKind::DegenerateFeature;
}

void fallback_solve(const CrossProducts& post, PathState& st,
                    const Eigen::VectorXd& warm, double lambda) {
  CoordinateDescentOptions cd;
  cd.tol = 1e-12;
  Eigen::VectorXd phi;
  try {
    phi = coordinate_descent(post, lambda, &warm, cd).phi;
  } catch (const NoConvergence& e) {
    phi = e.best().phi;
  }
  rebuild_state(post, st, phi, lambda);
}

}  // namespace

PathState PathState::at_zero(const CrossProducts& xp) {
  PathState st;
  const double lmax = xp.features() > 0 ? xp.xty.cwiseAbs().maxCoeff() : 0.0;
  st.lambda = lmax > 0.0 ? lmax : 1.0;
  st.signs.assign(static_cast<std::size_t>(xp.features()), 0);
  st.phi_active = Eigen::VectorXd(0);
  return st;
}

Eigen::VectorXd PathState::coefficients() const {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Index>(signs.size()));
  if (phi_active.size() != static_cast<Index>(active.size())) return phi;
  for (std::size_t i = 0; i < active.size(); ++i) {
    phi(active[i]) = phi_active(static_cast<Index>(i));
  }
  return phi;
}

double PathState::predict(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    acc += z(active[i]) * phi_active(static_cast<Index>(i));
  }
  return acc;
}

Eigen::VectorXd residual_correlations(const CrossProducts& xp,
                                      const PathState& state) {
  return xp.xty - gram_cols_times(xp.gram, state.active, state.phi_active);
}

void rebuild_state(const CrossProducts& xp, PathState& st,
                   const Eigen::Ref<const Eigen::VectorXd>& phi, double lambda) {
  const Index m = xp.features();
  st.lambda = lambda;
  st.active.clear();
  st.signs.assign(static_cast<std::size_t>(m), 0);
  for (Index j = 0; j < m; ++j) {
    if (phi(j) != 0.0) {
      st.active.push_back(j);
      st.signs[static_cast<std::size_t>(j)] = phi(j) > 0.0 ? 1 : -1;
    }
  }
  const Augment none{};
  for (int round = 0; round < 8; ++round) {
    st.ginv = GramInverse::from_gram(active_gram(xp, st.active));
    solve_active(xp, st, none);
    std::vector<Index> keep;
    for (std::size_t i = 0; i < st.active.size(); ++i) {
      const Index j = st.active[i];
      if (st.signs[static_cast<std::size_t>(j)] * st.phi_active(static_cast<Index>(i)) > 0.0) {
        keep.push_back(j);
      } else {
        st.signs[static_cast<std::size_t>(j)] = 0;
      }
    }
    if (keep.size() == st.active.size()) return;
    st.active = std::move(keep);
  }
  st.ginv = GramInverse::from_gram(active_gram(xp, st.active));
  solve_active(xp, st, none);
}

PathReport lambda_path(const CrossProducts& xp, PathState& state,
                       double lambda_to, const HomotopyOptions& opts,
                       std::vector<TransitionEvent>* log) {
  check_features(xp, state);
  if (!(lambda_to > 0.0) || !std::isfinite(lambda_to)) {
    throw Error(ErrorKind::InvalidArgument, "target lambda must be positive");
  }
  PathReport rep;
  const Eigen::VectorXd warm = state.coefficients();
  try {
    lambda_path_impl(xp, state, lambda_to, log, rep);
    if (!verify_or_repair(xp, state, Augment{}, opts, rep)) {
      throw Error(ErrorKind::SingularUpdate, "lambda-path post-check failed");
    }
  } catch (const Error& e) {
    if (!opts.fallback || !recoverable(e.kind())) throw;
    fallback_solve(xp, state, warm, lambda_to);
    rep.fallback = true;
  }
  return rep;
}

std::optional<TransitionEvent> gamma_transition(
    const CrossProducts& xp, const PathState& state, double gamma_now,
    double y_new, const Eigen::Ref<const Eigen::VectorXd>& z_new) {
  check_features(xp, state);
  if (!(gamma_now >= 0.0 && gamma_now <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "gamma must lie in [0, 1]");
  }
  if (z_new.size() != xp.features()) {
    throw Error(ErrorKind::DimensionMismatch, "observation length mismatch");
  }
  const double mu0 = gamma_now * gamma_now;
  const Segment seg = gamma_segment(xp, state, mu0, y_new, z_new);
  const std::vector<char> skip(static_cast<std::size_t>(xp.features()), 0);
  const auto ev =
      next_event(seg, state, -1, skip, kTieTol * std::max(seg.t_end, 1e-300));
  if (!ev) return std::nullopt;
  const double mu = std::min(1.0, mu0 + ev->t / (1.0 - ev->t * seg.q));
  return TransitionEvent{ev->kind, ev->feature, std::sqrt(mu), ev->sign};
}

PathReport reclasso_step(const CrossProducts& xp, PathState& state,
                         double y_new,
                         const Eigen::Ref<const Eigen::VectorXd>& z_new,
                         double lambda_new, const HomotopyOptions& opts,
                         std::vector<TransitionEvent>* log) {
  check_features(xp, state);
  if (z_new.size() != xp.features()) {
    throw Error(ErrorKind::DimensionMismatch, "observation length mismatch");
  }
  if (!(lambda_new > 0.0) || !std::isfinite(lambda_new)) {
    throw Error(ErrorKind::InvalidArgument, "lambda must be positive");
  }
  if (!std::isfinite(y_new) || !z_new.allFinite()) {
    throw Error(ErrorKind::NonFinite, "non-finite observation");
  }
  PathReport rep;
  const Eigen::VectorXd warm = state.coefficients();
  const Augment full{1.0, y_new, &z_new};
  try {
    lambda_path_impl(xp, state, lambda_new, log, rep);
    gamma_path_impl(xp, state, y_new, z_new, log, rep);
    if (!verify_or_repair(xp, state, full, opts, rep)) {
      throw Error(ErrorKind::SingularUpdate, "RecLasso post-check failed");
    }
  } catch (const Error& e) {
    if (!opts.fallback || !recoverable(e.kind())) throw;
    CrossProducts post = xp;
    post.absorb(y_new, z_new);
    fallback_solve(post, state, warm, lambda_new);
    rep.fallback = true;
  }
  return rep;
}

ActiveModel ActiveModel::fit(CrossProducts data, double lambda,
                             const HomotopyOptions& opts) {
  ActiveModel model(std::move(data));
  lambda_path(model, lambda, opts);
  return model;
}

ActiveModel ActiveModel::fit(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             double lambda, const HomotopyOptions& opts) {
  return fit(CrossProducts::from_design(Z, y), lambda, opts);
}

PathReport lambda_path(ActiveModel& model, double lambda_to,
                       const HomotopyOptions& opts,
                       std::vector<TransitionEvent>* log) {
  return lambda_path(model.data(), model.state(), lambda_to, opts, log);
}

std::optional<TransitionEvent> gamma_transition(
    const ActiveModel& model, double gamma_now, double y_new,
    const Eigen::Ref<const Eigen::VectorXd>& z_new) {
  return gamma_transition(model.data(), model.state(), gamma_now, y_new, z_new);
}

PathReport reclasso_update(ActiveModel& model, double y_new,
                           const Eigen::Ref<const Eigen::VectorXd>& z_new,
                           double lambda_new, const HomotopyOptions& opts,
                           std::vector<TransitionEvent>* log) {
  PathReport rep = reclasso_step(model.data_, model.state_, y_new, z_new,
                                 lambda_new, opts, log);
  model.data_.absorb(y_new, z_new);
  return rep;
}

}  // namespace onlasso
