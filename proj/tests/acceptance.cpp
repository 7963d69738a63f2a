// Acceptance suite: one PASS/FAIL line per numbered criterion, with the
// measured values and pinned tolerances inline.  Exits nonzero if any
// criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsebandit/design.hpp"
#include "sparsebandit/harness.hpp"
#include "sparsebandit/instances.hpp"
#include "sparsebandit/kernels.hpp"
#include "sparsebandit/lasso.hpp"
#include "sparsebandit/model.hpp"
#include "sparsebandit/policies.hpp"
#include "sparsebandit/rng.hpp"

using namespace sparsebandit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

ActionSet basis_actions(std::size_t d) {
  std::vector<Action> arms(d);
  for (std::size_t i = 0; i < d; ++i) {
    arms[i].coords.assign(d, 0.0);
    arms[i].coords[i] = 1.0;
  }
  return ActionSet(std::move(arms), d);
}

ActionSet corner_actions(std::size_t d) {
  std::vector<Action> arms;
  arms.reserve(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    Action a;
    a.coords.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
      if (mask & (std::size_t{1} << j)) a.coords[j] = -1.0;
    }
    arms.push_back(std::move(a));
  }
  return ActionSet(std::move(arms), d);
}

// --- 1: E-optimal design exactness on sets with known optima ---------------

Outcome design_exactness() {
  double worst_basis = 0.0, worst_corner = 0.0, worst_time = 0.0;
  for (std::size_t d : {std::size_t{5}, std::size_t{20}, std::size_t{100}}) {
    const Clock::time_point t0 = Clock::now();
    const auto [mu, cert] = solve_e_optimal(basis_actions(d), 1e-4);
    worst_time = std::max(worst_time, seconds_since(t0));
    worst_basis = std::max(worst_basis, std::fabs(cert.objective - 1.0 / static_cast<double>(d)));
  }
  for (std::size_t d = 2; d <= 6; ++d) {
    const Clock::time_point t0 = Clock::now();
    const auto [mu, cert] = solve_e_optimal(corner_actions(d), 1e-4);
    worst_time = std::max(worst_time, seconds_since(t0));
    worst_corner = std::max(worst_corner, std::fabs(cert.objective - 1.0));
  }
  Outcome o;
  o.pass = worst_basis <= 1e-3 && worst_corner <= 1e-3 && worst_time < 10.0;
  o.detail = "basis d in {5,20,100} max |obj - 1/d| = " + fmt(worst_basis) +
             ", corners d in {2..6} max |obj - 1| = " + fmt(worst_corner) +
             " (tol 1e-3); slowest solve " + fmt(worst_time, 3) + " s (< 10 s)";
  return o;
}

// --- 2: hard-instance C_min reaches kappa^2 --------------------------------

Outcome hard_instance_cmin() {
  std::string detail;
  bool pass = true;
  for (double kappa : {0.5, 1.0}) {
    HardInstanceSpec spec;
    spec.d = 10;
    spec.s = 3;
    spec.kappa = kappa;
    spec.epsilon = default_epsilon(kappa, spec.s, 1000);
    HardInstance hard = hard_instance(spec);
    const auto [mu, cert] = solve_e_optimal(hard.actions, 1e-3);
    const double target = kappa * kappa;
    if (!(cert.objective >= target - 1e-3)) pass = false;
    if (!detail.empty()) detail += ", ";
    detail += "kappa=" + fmt(kappa, 2) + ": objective " + fmt(cert.objective) + " vs " +
              fmt(target, 3) + " - 1e-3 (" + std::to_string(hard.actions.size()) + " actions)";
  }
  return Outcome{pass, detail};
}

// --- 3: Lasso equals brute-force grid minimization -------------------------

double lasso_objective(const Mat& X, const std::vector<double>& y,
                       const std::vector<double>& theta, double lambda) {
  const std::size_t n = X.rows, d = X.cols;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - kernels::dot(X.row(i), theta.data(), d);
    rss += r * r;
  }
  double l1 = 0.0;
  for (double t : theta) l1 += std::fabs(t);
  return rss / static_cast<double>(n) + lambda * l1;
}

// Coarse-to-fine grid minimization of the Lasso objective (independent
// oracle: 9 points per dimension, recentred and shrunk 8 times).
std::vector<double> grid_minimize(const Mat& X, const std::vector<double>& y, double lambda) {
  const std::size_t d = X.cols;
  std::vector<double> center(d, 0.0);
  double radius = 2.0;
  for (int round = 0; round < 8; ++round) {
    std::vector<double> best = center;
    double best_obj = lasso_objective(X, y, best, lambda);
    std::vector<int> idx(d, -4);
    for (;;) {
      std::vector<double> pt(d);
      for (std::size_t j = 0; j < d; ++j) pt[j] = center[j] + radius * idx[j] / 4.0;
      const double obj = lasso_objective(X, y, pt, lambda);
      if (obj < best_obj) {
        best_obj = obj;
        best = pt;
      }
      std::size_t k = 0;
      while (k < d && ++idx[k] > 4) idx[k++] = -4;
      if (k == d) break;
    }
    center = best;
    radius /= 3.0;
  }
  return center;
}

Outcome lasso_oracle_equivalence() {
  RngStream rng(9000, stream_label("acceptance", 3));
  double worst_dev = 0.0, worst_kkt = 0.0;
  int converged = 0;
  const int problems = 100;
  for (int k = 0; k < problems; ++k) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform_int(3));
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform_int(18));
    Mat X(n, d);
    for (auto& v : X.a) v = rng.uniform(-1.0, 1.0);
    std::vector<double> theta(d, 0.0);
    for (auto& t : theta) {
      if (rng.uniform() < 0.7) t = rng.uniform(-1.0, 1.0);
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = kernels::dot(X.row(i), theta.data(), d) + 0.3 * rng.normal();
    }
    const double lambda = 0.05 + 0.45 * rng.uniform();
    const LassoFit fit = fit_lasso(X, y, lambda);
    if (fit.converged) ++converged;
    worst_kkt = std::max(worst_kkt, fit.kkt_residual);
    const std::vector<double> oracle = grid_minimize(X, y, lambda);
    for (std::size_t j = 0; j < d; ++j) {
      worst_dev = std::max(worst_dev, std::fabs(fit.coefficients[j] - oracle[j]));
    }
  }
  Outcome o;
  o.pass = worst_dev <= 5e-3 && worst_kkt <= 1e-7 && converged == problems;
  o.detail = std::to_string(problems) + " problems (d <= 3, n <= 20): max |coord dev| = " +
             fmt(worst_dev) + " (tol 5e-3), max KKT residual = " + fmt(worst_kkt) +
             " (tol 1e-7), " + std::to_string(converged) + "/100 converged";
  return o;
}

// --- 4 + 5: Lasso statistical error / screening on Rademacher designs ------

struct RademacherStats {
  int l1_ok = 0;
  int screen_ok = 0;
  int size_ok = 0;
  double l1_bound = 0.0;
  double elapsed = 0.0;
};

RademacherStats rademacher_regime() {
  const Clock::time_point t0 = Clock::now();
  const std::size_t n = 200, d = 500, s = 5;
  const double sigma = 1.0, min_signal = 0.75;
  const double lambda = lambda_schedule(n, d);
  RademacherStats stats;
  // (sigma*s/kappa_hat)*sqrt(2*log(2d/delta)/n) with kappa_hat=1/2, delta=0.05.
  stats.l1_bound = (sigma * s / 0.5) * std::sqrt(2.0 * std::log(2.0 * d / 0.05) / n);
  for (int seed = 0; seed < 50; ++seed) {
    RngStream rng(4000 + seed, 0);
    Mat X(n, d);
    for (auto& v : X.a) v = rng.sign();
    std::vector<double> theta(d, 0.0);
    for (std::size_t j = 0; j < s; ++j) theta[j] = (j % 2 == 0) ? 1.0 : -1.0;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = kernels::dot(X.row(i), theta.data(), d) + sigma * rng.normal();
    }
    const LassoFit fit = fit_lasso(X, y, lambda);
    double l1 = 0.0;
    for (std::size_t j = 0; j < d; ++j) l1 += std::fabs(fit.coefficients[j] - theta[j]);
    if (l1 <= stats.l1_bound) ++stats.l1_ok;
    const std::vector<std::size_t> shat = support(fit, min_signal / 2.0);
    bool covered = true;
    for (std::size_t j = 0; j < s; ++j) {
      if (!std::binary_search(shat.begin(), shat.end(), j)) covered = false;
    }
    if (covered) ++stats.screen_ok;
    if (static_cast<double>(support(fit).size()) <=
        9.0 * fit.max_design_eigen * static_cast<double>(s)) {
      ++stats.size_ok;
    }
  }
  stats.elapsed = seconds_since(t0);
  return stats;
}

Outcome lasso_l1_bound(const RademacherStats& stats) {
  Outcome o;
  o.pass = stats.l1_ok >= 45 && stats.elapsed < 120.0;
  o.detail = "n=200, d=500, s=5: l1 error <= " + fmt(stats.l1_bound, 6) + " in " +
             std::to_string(stats.l1_ok) + "/50 seeds (need >= 45); " + fmt(stats.elapsed, 3) +
             " s (< 120 s)";
  return o;
}

Outcome lasso_screening(const RademacherStats& stats) {
  Outcome o;
  o.pass = stats.screen_ok >= 45 && stats.size_ok == 50;
  o.detail = "support covered at threshold 0.375 in " + std::to_string(stats.screen_ok) +
             "/50 seeds (need >= 45); |Shat| <= 9*phi_max*s in " + std::to_string(stats.size_ok) +
             "/50 (need 50)";
  return o;
}

// --- 6: explore-then-commit regret grows at the n^{2/3} rate ---------------

Outcome estc_rate() {
  const Clock::time_point t0 = Clock::now();
  const ExperimentConfig cfg = config_from_json(R"({
    "instance": {"kind": "hard_subsampled", "dim": 60, "sparsity": 3, "kappa": 1.0},
    "policies": [{"name": "estc"}],
    "horizons": [2000, 4000, 8000, 16000],
    "replications": 20,
    "base_seed": 1,
    "design_tol": 0.05
  })");
  const ExperimentResult result = run_experiment(cfg);
  std::vector<std::size_t> horizons;
  std::vector<double> medians;
  for (const SummaryRow& row : summarize(result)) {
    horizons.push_back(row.horizon);
    medians.push_back(row.median);
  }
  const double slope = loglog_slope(horizons, medians);
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = slope >= 0.55 && slope <= 0.80 && elapsed < 600.0;
  o.detail = "d=60, s=3, horizons {2000..16000}, 20 seeds: log-log slope = " + fmt(slope) +
             " (need [0.55, 0.80]); medians";
  for (double m : medians) o.detail += " " + fmt(m, 5);
  o.detail += "; " + fmt(elapsed, 3) + " s (< 600 s)";
  return o;
}

double median_of(const std::vector<SummaryRow>& rows, const std::string& policy) {
  for (const SummaryRow& row : rows) {
    if (row.policy == policy) return row.median;
  }
  throw std::runtime_error("summary row not found for policy " + policy);
}

// --- 7: data-poor regime ordering: ESTC beats LinUCB -----------------------

Outcome data_poor_ordering() {
  const ExperimentConfig cfg = config_from_json(R"({
    "instance": {"kind": "hard_subsampled", "dim": 100, "sparsity": 5, "kappa": 1.0,
                 "n_informative": 500, "n_low_regret": 200},
    "policies": [{"name": "estc"}, {"name": "linucb"}],
    "horizons": [1000],
    "replications": 20,
    "base_seed": 1,
    "design_tol": 0.05
  })");
  const std::vector<SummaryRow> rows = summarize(run_experiment(cfg));
  const double estc = median_of(rows, "estc");
  const double linucb = median_of(rows, "linucb");
  Outcome o;
  o.pass = estc < linucb;
  o.detail = "d=100, s=5, n=1000, 700 actions, 20 seeds: ESTC median " + fmt(estc, 5) +
             " < LinUCB median " + fmt(linucb, 5);
  return o;
}

// --- 8: support screening lets phased elimination beat ESTC ----------------

Outcome restricted_pe_improvement() {
  const ExperimentConfig cfg = config_from_json(R"({
    "instance": {"kind": "random", "dim": 20, "sparsity": 2, "num_actions": 50,
                 "signal": 0.75},
    "policies": [{"name": "rpe", "sparsity": 2, "min_signal": 0.75, "c1_constant": 6.0},
                 {"name": "estc", "sparsity": 2}],
    "horizons": [4000],
    "replications": 50,
    "base_seed": 1
  })");
  const std::vector<SummaryRow> rows = summarize(run_experiment(cfg));
  const double rpe = median_of(rows, "rpe");
  const double estc = median_of(rows, "estc");
  Outcome o;
  o.pass = rpe < estc;
  o.detail = "d=20, s=2, m=0.75, K=50, n=4000, 50 seeds: restricted-PE median " + fmt(rpe, 5) +
             " < ESTC median " + fmt(estc, 5);
  return o;
}

// --- 9: closed-form KL matches Monte Carlo log-likelihood ratios -----------

Outcome kl_monte_carlo() {
  std::vector<Action> arms(2);
  arms[0].coords = {1.0, 0.0};
  arms[1].coords = {0.0, 1.0};
  ActionSet actions(std::move(arms), 2);
  const std::vector<double> theta = {0.3, -0.2};
  const std::vector<double> tilde = {0.1, 0.4};
  const std::vector<double> pulls = {2.0, 1.0};  // fixed 3-round policy: arm 0, 0, then 1
  const double kl = kl_between(theta, tilde, actions, pulls, 1.0);

  RngStream rng(42, stream_label("acceptance", 9));
  const std::size_t runs = 100000;
  double mean = 0.0, m2 = 0.0;
  const std::size_t sequence[3] = {0, 0, 1};
  for (std::size_t r = 0; r < runs; ++r) {
    double llr = 0.0;
    for (std::size_t t = 0; t < 3; ++t) {
      const Action& a = actions[sequence[t]];
      const double mu = a.dot(theta);
      const double mu_tilde = a.dot(tilde);
      const double y = mu + rng.normal();
      llr += ((y - mu_tilde) * (y - mu_tilde) - (y - mu) * (y - mu)) / 2.0;
    }
    const double delta = llr - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (llr - mean);
  }
  const double se = std::sqrt(m2 / static_cast<double>(runs - 1) / static_cast<double>(runs));
  Outcome o;
  o.pass = std::fabs(mean - kl) <= 3.0 * se + 1e-12;
  o.detail = "2-action d=2, 3-round policy, 1e5 runs: MC mean " + fmt(mean, 6) +
             " vs closed form " + fmt(kl, 6) + ", |diff| = " + fmt(std::fabs(mean - kl)) +
             " <= 3 SE = " + fmt(3.0 * se);
  return o;
}

// --- 10: phased elimination keeps the best arm and meets its regret bound --

Outcome phased_elimination_contract() {
  const std::size_t d = 5, n = 20000, seeds = 200;
  ActionSet actions = basis_actions(d);
  SparseInstance instance;
  instance.theta = {0.5, 0.0, 0.0, 0.0, 0.0};  // all suboptimal gaps are 0.5
  instance.sparsity_bound = 1;
  instance.noise_std = 1.0;
  int survived = 0;
  std::vector<double> finals;
  finals.reserve(seeds);
  for (std::size_t seed = 0; seed < seeds; ++seed) {
    RngStream rng(seed, stream_label("acceptance", 10));
    PhasedEliminationResult res = run_phased_elimination(actions, instance, n, 0.1, rng);
    if (std::find(res.diag.surviving.begin(), res.diag.surviving.end(), std::size_t{0}) !=
        res.diag.surviving.end()) {
      ++survived;
    }
    finals.push_back(res.traj.total_regret());
  }
  const double median = quantile(finals, 0.5);
  const double bound =
      5.0 * std::sqrt(static_cast<double>(n * d) *
                      std::log(static_cast<double>(actions.size()) * static_cast<double>(n)));
  Outcome o;
  o.pass = survived >= 170 && median <= bound;
  o.detail = "d=5 basis, gaps 0.5, n=20000, delta=0.1, 200 seeds: optimal arm survived " +
             std::to_string(survived) + "/200 (need >= 170); median regret " + fmt(median, 5) +
             " <= 5*sqrt(nd log(Kn)) = " + fmt(bound, 6);
  return o;
}

// --- 11: rerunning an experiment yields byte-identical CSV -----------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism() {
  const ExperimentConfig cfg = config_from_json(R"({
    "instance": {"kind": "random", "dim": 12, "sparsity": 2, "num_actions": 24},
    "policies": [{"name": "estc", "sparsity": 2},
                 {"name": "linucb"},
                 {"name": "phased"},
                 {"name": "rpe", "min_signal": 1.0, "c1_constant": 2.0}],
    "horizons": [200, 400],
    "replications": 3,
    "base_seed": 5
  })");
  const std::string path1 =
      (std::filesystem::temp_directory_path() / "sb_acceptance_run1.csv").string();
  const std::string path2 =
      (std::filesystem::temp_directory_path() / "sb_acceptance_run2.csv").string();
  emit_csv(run_experiment(cfg), path1);
  emit_csv(run_experiment(cfg), path2);
  const std::string a = slurp(path1), b = slurp(path2);
  Outcome o;
  o.pass = !a.empty() && a == b;
  o.detail = "4 policies x 2 horizons x 3 seeds rerun: " + std::to_string(a.size()) +
             " CSV bytes, rerun " + (a == b ? "identical" : "DIFFERS");
  return o;
}

}  // namespace

int main() {
  const Clock::time_point t0 = Clock::now();
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };

  report(1, "design exactness", design_exactness);
  report(2, "hard-instance C_min", hard_instance_cmin);
  report(3, "lasso oracle equivalence", lasso_oracle_equivalence);
  const RademacherStats stats = rademacher_regime();
  report(4, "lasso l1 error bound", [&] { return lasso_l1_bound(stats); });
  report(5, "lasso screening and sparsity", [&] { return lasso_screening(stats); });
  report(6, "explore-then-commit rate", estc_rate);
  report(7, "data-poor ordering", data_poor_ordering);
  report(8, "restricted-PE improvement", restricted_pe_improvement);
  report(9, "KL closed form vs Monte Carlo", kl_monte_carlo);
  report(10, "phased elimination contract", phased_elimination_contract);
  report(11, "byte-identical reruns", determinism);

  std::printf("acceptance: %d/11 passed in %.1f s\n", 11 - failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
