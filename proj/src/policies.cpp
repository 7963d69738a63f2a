#include "sparsebandit/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "sparsebandit/kernels.hpp"
#include "sparsebandit/linalg.hpp"

namespace sparsebandit {

namespace {

void check_design(const DesignDistribution& design, const ActionSet& actions) {
  if (design.dim != actions.dim())
    throw std::invalid_argument("policy: design dimension mismatch");
  if (design.atoms.empty())
    throw std::invalid_argument("policy: design has no atoms");
  double total = 0.0;
  for (const auto& [idx, w] : design.atoms) {
    if (idx >= actions.size())
      throw std::invalid_argument("policy: design atom out of range");
    if (w < -1e-15) throw std::invalid_argument("policy: negative design weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("policy: design weights must sum to one");
}

std::size_t sample_atom(const DesignDistribution& design, RngStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [idx, w] : design.atoms) {
    acc += w;
    if (u < acc) return idx;
  }
  return design.atoms.back().first;
}

// Plays n_rounds iid draws from the design, recording them in traj and
// filling the regression data (X rows are the played actions).
void explore_rounds(const ActionSet& actions, const SparseInstance& env,
                    const DesignDistribution& design, std::size_t n_rounds,
                    const std::vector<double>& gaps, RngStream& rng,
                    RegretTrajectory& traj, Mat& X, std::vector<double>& y) {
  const std::size_t d = actions.dim();
  X = Mat(n_rounds, d);
  y.assign(n_rounds, 0.0);
  for (std::size_t t = 0; t < n_rounds; ++t) {
    const std::size_t idx = sample_atom(design, rng);
    const double reward = sample_reward(env, actions[idx], rng);
    std::memcpy(X.row(t), actions[idx].coords.data(), d * sizeof(double));
    y[t] = reward;
    traj.record(idx, reward, gaps[idx]);
  }
}

std::size_t greedy_index(const ActionSet& actions, const std::vector<double>& est) {
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double v = actions[i].dot(est);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  return best;
}

std::string row_key(const double* row, std::size_t len) {
  return std::string(reinterpret_cast<const char*>(row), len * sizeof(double));
}

// G-optimal phased elimination over arbitrary estimation features.  Pulls are
// always original actions (via the representative map); estimation and
// elimination run on the feature rows.  Appends at most `budget` rounds.
void phased_core(const ActionSet& play_actions, const SparseInstance& env,
                 const std::vector<double>& gaps, const Mat& features,
                 std::size_t budget, double delta, RngStream& rng,
                 RegretTrajectory& traj, PhaseDiagnostics& diag) {
  const std::size_t p_all = features.cols;

  // Collapse actions with identical feature rows: they are indistinguishable
  // to the estimator, so the lowest-index one represents the group.
  std::vector<std::size_t> rep;
  std::vector<std::size_t> row_of;  // unique index -> row in `features`
  {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < features.rows; ++i)
      if (seen.emplace(row_key(features.row(i), p_all), rep.size()).second) {
        rep.push_back(i);
        row_of.push_back(i);
      }
  }
  const std::size_t u = rep.size();

  // Drop globally dependent estimation coordinates once.
  std::vector<std::size_t> kept_cols;
  {
    Mat gram(p_all, p_all);
    for (std::size_t a = 0; a < p_all; ++a)
      for (std::size_t b = a; b < p_all; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < u; ++i)
          s += features(row_of[i], a) * features(row_of[i], b);
        gram(a, b) = gram(b, a) = s;
      }
    kept_cols = pivoted_independent_columns(gram);
    for (std::size_t c = 0; c < p_all; ++c)
      if (!std::binary_search(kept_cols.begin(), kept_cols.end(), c))
        diag.dropped_coords.push_back(c);
  }

  Mat W(u, kept_cols.size());
  for (std::size_t i = 0; i < u; ++i)
    for (std::size_t c = 0; c < kept_cols.size(); ++c)
      W(i, c) = features(row_of[i], kept_cols[c]);

  std::vector<std::size_t> live(u);
  for (std::size_t i = 0; i < u; ++i) live[i] = i;

  std::size_t used = 0;
  double eps = 0.5;  // phase 1 accuracy 2^{-1}
  std::size_t phase = 1;
  const auto survivors = [&] {
    diag.surviving.clear();
    for (std::size_t i : live) diag.surviving.push_back(rep[i]);
    std::sort(diag.surviving.begin(), diag.surviving.end());
  };

  while (used < budget) {
    // Per-phase column selection: the live arms must span the coordinates the
    // phase estimates.
    Mat gram(W.cols, W.cols);
    for (std::size_t a = 0; a < W.cols; ++a)
      for (std::size_t b = a; b < W.cols; ++b) {
        double s = 0.0;
        for (std::size_t i : live) s += W(i, a) * W(i, b);
        gram(a, b) = gram(b, a) = s;
      }
    const auto cols = pivoted_independent_columns(gram);
    const std::size_t p = cols.size();

    if (p == 0) {
      // All live features are zero; nothing can be learned.  Play the lowest
      // representative for the remaining rounds.
      const std::size_t original = rep[live.front()];
      while (used < budget) {
        const double reward = sample_reward(env, play_actions[original], rng);
        traj.record(original, reward, gaps[original]);
        ++used;
      }
      break;
    }

    // Group live arms that coincide on this phase's columns.
    std::vector<std::size_t> group_rep;                // phase group -> unique idx
    std::vector<std::vector<std::size_t>> group_members;
    {
      std::unordered_map<std::string, std::size_t> seen;
      std::vector<double> proj(p);
      for (std::size_t i : live) {
        for (std::size_t c = 0; c < p; ++c) proj[c] = W(i, cols[c]);
        const auto [it, fresh] =
            seen.emplace(row_key(proj.data(), p), group_rep.size());
        if (fresh) {
          group_rep.push_back(i);
          group_members.push_back({i});
        } else {
          group_members[it->second].push_back(i);
        }
      }
    }
    const std::size_t g = group_rep.size();
    Mat P(g, p);
    for (std::size_t a = 0; a < g; ++a)
      for (std::size_t c = 0; c < p; ++c) P(a, c) = W(group_rep[a], cols[c]);

    std::vector<Action> phase_arms(g);
    for (std::size_t a = 0; a < g; ++a)
      phase_arms[a].coords.assign(P.row(a), P.row(a) + p);
    const auto [design, cert] = solve_g_optimal(ActionSet(std::move(phase_arms), p),
                                                1e-3, 2000);
    (void)cert;
    auto atoms = design.atoms;
    std::sort(atoms.begin(), atoms.end());

    const double log_term =
        std::log(static_cast<double>(u) * static_cast<double>(phase) *
                 static_cast<double>(phase + 1) / delta);
    Mat V(p, p);
    std::vector<double> bvec(p, 0.0);
    std::size_t scheduled = 0, played = 0;
    for (const auto& [arm, weight] : atoms) {
      const auto pulls = static_cast<std::size_t>(
          std::ceil(2.0 * static_cast<double>(p) * weight / (eps * eps) * log_term));
      scheduled += pulls;
      const std::size_t original = rep[group_rep[arm]];
      for (std::size_t k = 0; k < pulls && used < budget; ++k) {
        const double reward = sample_reward(env, play_actions[original], rng);
        traj.record(original, reward, gaps[original]);
        ++used;
        ++played;
        for (std::size_t a = 0; a < p; ++a) {
          bvec[a] += reward * P(arm, a);
          for (std::size_t b = 0; b < p; ++b) V(a, b) += P(arm, a) * P(arm, b);
        }
      }
    }
    if (played < scheduled) break;  // budget ran out mid-phase: no update

    const auto solve = solve_spd(V, bvec);
    diag.used_pinv = diag.used_pinv || solve.used_pinv;
    std::vector<double> values(g);
    double vmax = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < g; ++a) {
      values[a] = kernels::dot(P.row(a), solve.x.data(), p);
      vmax = std::max(vmax, values[a]);
    }
    std::vector<std::size_t> next_live;
    for (std::size_t a = 0; a < g; ++a)
      if (vmax - values[a] <= 2.0 * eps)
        next_live.insert(next_live.end(), group_members[a].begin(),
                         group_members[a].end());
    std::sort(next_live.begin(), next_live.end());
    live = std::move(next_live);
    ++diag.phases_completed;
    eps *= 0.5;
    ++phase;
  }
  survivors();
}

}  // namespace

std::size_t exploration_length(std::size_t n, std::size_t d, std::size_t s,
                               double r_max, double c_min) {
  if (n == 0 || d < 2 || s == 0 || !(r_max > 0.0) || !(c_min > 0.0))
    throw std::invalid_argument(
        "exploration_length: need n >= 1, d >= 2, s >= 1, r_max > 0, c_min > 0");
  const double nn = static_cast<double>(n);
  const double value = std::pow(nn, 2.0 / 3.0) *
                       std::cbrt(static_cast<double>(s) * static_cast<double>(s) *
                                 std::log(2.0 * static_cast<double>(d))) *
                       std::pow(r_max, -2.0 / 3.0) * std::cbrt(2.0 / (c_min * c_min));
  const double clamped = std::min(std::max(std::ceil(value), 1.0), nn);
  return static_cast<std::size_t>(clamped);
}

void EstcConfig::validate() const {
  if (horizon == 0) throw std::invalid_argument("EstcConfig: horizon must be positive");
  if (!(r_max > 0.0)) throw std::invalid_argument("EstcConfig: r_max must be positive");
  if (c_min < 0.0) throw std::invalid_argument("EstcConfig: c_min must be non-negative");
}

std::size_t EstcConfig::resolved_n1(std::size_t dim) const {
  validate();
  if (explicit_n1 > 0) return std::min(explicit_n1, horizon);
  if (sparsity > 0 && c_min > 0.0)
    return exploration_length(horizon, dim, sparsity, r_max, c_min);
  const auto two_thirds = static_cast<std::size_t>(
      std::ceil(std::pow(static_cast<double>(horizon), 2.0 / 3.0)));
  return std::min(std::max<std::size_t>(two_thirds, 1), horizon);
}

EstcResult run_estc(const ActionSet& actions, const SparseInstance& instance,
                    const EstcConfig& config, const DesignDistribution& design,
                    RngStream& rng) {
  config.validate();
  instance.validate();
  if (instance.dim() != actions.dim())
    throw std::invalid_argument("run_estc: instance dimension mismatch");
  check_design(design, actions);

  const std::vector<double> gaps = all_gaps(instance, actions);
  EstcResult out;
  out.n1 = config.resolved_n1(actions.dim());

  Mat X;
  std::vector<double> y;
  explore_rounds(actions, instance, design, out.n1, gaps, rng, out.traj, X, y);

  out.lambda1 = lambda_schedule(out.n1, actions.dim());
  out.fit = fit_lasso(X, y, out.lambda1);
  out.committed_index = greedy_index(actions, out.fit.coefficients);

  for (std::size_t t = out.n1; t < config.horizon; ++t) {
    const double reward = sample_reward(instance, actions[out.committed_index], rng);
    out.traj.record(out.committed_index, reward, gaps[out.committed_index]);
  }
  return out;
}

void RpeConfig::validate() const {
  if (horizon == 0) throw std::invalid_argument("RpeConfig: horizon must be positive");
  if (sparsity == 0) throw std::invalid_argument("RpeConfig: sparsity must be positive");
  if (!(min_signal > 0.0))
    throw std::invalid_argument("RpeConfig: min_signal must be positive");
  if (!(c1_constant > 0.0))
    throw std::invalid_argument("RpeConfig: c1_constant must be positive");
  if (!(elimination_delta > 0.0) || !(elimination_delta < 1.0))
    throw std::invalid_argument("RpeConfig: elimination_delta must lie in (0,1)");
  if (!(c_min > 0.0)) throw std::invalid_argument("RpeConfig: c_min must be positive");
}

std::size_t RpeConfig::resolved_n2(std::size_t dim) const {
  validate();
  if (explicit_n2 > 0) return std::min(explicit_n2, horizon);
  const double value = c1_constant * static_cast<double>(sparsity) *
                       std::log(static_cast<double>(dim)) /
                       (min_signal * min_signal * c_min);
  const double clamped =
      std::min(std::max(std::ceil(value), 1.0), static_cast<double>(horizon));
  return static_cast<std::size_t>(clamped);
}

PhasedEliminationResult run_phased_elimination(const ActionSet& actions,
                                               const SparseInstance& instance,
                                               std::size_t horizon, double delta,
                                               RngStream& rng) {
  if (horizon == 0)
    throw std::invalid_argument("run_phased_elimination: horizon must be positive");
  if (!(delta > 0.0) || !(delta < 1.0))
    throw std::invalid_argument("run_phased_elimination: delta must lie in (0,1)");
  instance.validate();
  if (instance.dim() != actions.dim())
    throw std::invalid_argument("run_phased_elimination: dimension mismatch");

  const std::vector<double> gaps = all_gaps(instance, actions);
  Mat features(actions.size(), actions.dim());
  for (std::size_t i = 0; i < actions.size(); ++i)
    std::memcpy(features.row(i), actions[i].coords.data(),
                actions.dim() * sizeof(double));

  PhasedEliminationResult out;
  phased_core(actions, instance, gaps, features, horizon, delta, rng, out.traj,
              out.diag);
  return out;
}

RpeResult run_restricted_pe(const ActionSet& actions, const SparseInstance& instance,
                            const RpeConfig& config, const DesignDistribution& design,
                            RngStream& rng) {
  config.validate();
  instance.validate();
  if (instance.dim() != actions.dim())
    throw std::invalid_argument("run_restricted_pe: instance dimension mismatch");
  check_design(design, actions);

  const std::vector<double> gaps = all_gaps(instance, actions);
  RpeResult out;
  out.n2 = config.resolved_n2(actions.dim());

  Mat X;
  std::vector<double> y;
  explore_rounds(actions, instance, design, out.n2, gaps, rng, out.traj, X, y);

  out.lambda2 = lambda_schedule(out.n2, actions.dim());
  out.fit = fit_lasso(X, y, out.lambda2);
  out.selected_support = support(out.fit, config.min_signal / 2.0);
  if (out.selected_support.empty()) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < out.fit.coefficients.size(); ++j)
      if (std::fabs(out.fit.coefficients[j]) > std::fabs(out.fit.coefficients[best]))
        best = j;
    out.selected_support = {best};
    out.support_fallback = true;
  }

  if (config.horizon > out.n2) {
    Mat features(actions.size(), out.selected_support.size());
    for (std::size_t i = 0; i < actions.size(); ++i)
      for (std::size_t c = 0; c < out.selected_support.size(); ++c)
        features(i, c) = actions[i].coords[out.selected_support[c]];
    PhaseDiagnostics diag;
    phased_core(actions, instance, gaps, features, config.horizon - out.n2,
                config.elimination_delta, rng, out.traj, diag);
    // Dropped estimation coordinates are positions into the selected support;
    // report them as original coordinate indices.
    for (auto& c : diag.dropped_coords) c = out.selected_support[c];
    out.elimination = std::move(diag);
  }
  return out;
}

LinUcbResult run_linucb(const ActionSet& actions, const SparseInstance& instance,
                        std::size_t horizon, double regularization,
                        double confidence_scale, RngStream& rng) {
  if (horizon == 0)
    throw std::invalid_argument("run_linucb: horizon must be positive");
  if (!(regularization > 0.0))
    throw std::invalid_argument("run_linucb: regularization must be positive");
  if (!(confidence_scale > 0.0))
    throw std::invalid_argument("run_linucb: confidence_scale must be positive");
  instance.validate();
  if (instance.dim() != actions.dim())
    throw std::invalid_argument("run_linucb: dimension mismatch");

  const std::size_t d = actions.dim();
  const std::size_t K = actions.size();
  const double lam = regularization;
  const double delta = 1.0 / static_cast<double>(horizon);
  const double param_norm =
      std::sqrt(kernels::sumsq(instance.theta.data(), d));
  const std::vector<double> gaps = all_gaps(instance, actions);

  Mat V = Mat::identity(d);
  for (auto& v : V.a) v *= lam;
  Mat Vinv = Mat::identity(d);
  for (auto& v : Vinv.a) v /= lam;
  std::vector<double> bvec(d, 0.0), theta_hat(d, 0.0);
  std::vector<double> q(K), est(K, 0.0);
  for (std::size_t i = 0; i < K; ++i)
    q[i] = kernels::sumsq(actions[i].coords.data(), d) / lam;

  const auto refresh = [&] {
    Mat L = V;
    if (!cholesky(L)) return;  // keep incremental state; V is SPD by design
    std::vector<double> e(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
      e.assign(d, 0.0);
      e[c] = 1.0;
      const auto col = cholesky_solve(L, e);
      for (std::size_t r = 0; r < d; ++r) Vinv(r, c) = col[r];
    }
    theta_hat = matvec(Vinv, bvec);
    for (std::size_t i = 0; i < K; ++i) {
      const auto vx = matvec(Vinv, actions[i].coords);
      q[i] = kernels::dot(actions[i].coords.data(), vx.data(), d);
      est[i] = kernels::dot(theta_hat.data(), actions[i].coords.data(), d);
    }
  };

  LinUcbResult out;
  std::vector<double> svec(d), tdot(K);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double beta =
        confidence_scale *
        (std::sqrt(lam) * param_norm +
         std::sqrt(2.0 * std::log(1.0 / delta) +
                   static_cast<double>(d) *
                       std::log(1.0 + static_cast<double>(t) /
                                          (lam * static_cast<double>(d)))));
    std::size_t best = 0;
    double best_ucb = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < K; ++i) {
      const double ucb = est[i] + beta * std::sqrt(std::max(q[i], 0.0));
      if (ucb > best_ucb) {
        best_ucb = ucb;
        best = i;
      }
    }
    const double reward = sample_reward(instance, actions[best], rng);
    out.traj.record(best, reward, gaps[best]);

    const auto& a = actions[best].coords;
    svec = matvec(Vinv, a);
    const double denom = 1.0 + kernels::dot(a.data(), svec.data(), d);
    for (std::size_t r = 0; r < d; ++r) {
      kernels::axpy(-svec[r] / denom, svec.data(), Vinv.row(r), d);
      kernels::axpy(a[r], a.data(), V.row(r), d);
      bvec[r] += reward * a[r];
    }
    theta_hat = matvec(Vinv, bvec);
    for (std::size_t i = 0; i < K; ++i) {
      tdot[i] = kernels::dot(actions[i].coords.data(), svec.data(), d);
      q[i] -= tdot[i] * tdot[i] / denom;
      est[i] = kernels::dot(theta_hat.data(), actions[i].coords.data(), d);
    }
    if (t % 250 == 0) refresh();
  }
  out.theta_hat = std::move(theta_hat);
  return out;
}

}  // namespace sparsebandit
