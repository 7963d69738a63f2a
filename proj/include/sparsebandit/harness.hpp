#pragma once
// ===========================================================================
// Experiment harness: JSON-configured batch runs of the bandit policies over
// generated instances, with seeded replications, CSV/SVG output and log-log
// slope fitting.
//
// Determinism contract: run_experiment(config) is a pure function of the
// config.  Instances derive from config.instance.instance_seed (one action
// set per experiment, shared across horizons), each replication r draws from
// RngStream(base_seed + r, stream_label("run", policy_index, horizon_index)),
// and parallel execution writes into preallocated slots so thread scheduling
// never reorders results.
// ===========================================================================

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sparsebandit/design.hpp"
#include "sparsebandit/model.hpp"

namespace sparsebandit {

enum class InstanceKind {
  kHard,            // full enumeration (small d only)
  kHardSubsampled,  // subsampled low-regret + informative blocks
  kRandom,          // num_actions i.i.d. uniform actions, random sparse theta
};

struct InstanceConfig {
  InstanceKind kind = InstanceKind::kHardSubsampled;
  std::size_t dim = 100;
  std::size_t sparsity = 5;
  double kappa = 1.0;
  // 0 means "tune per horizon": epsilon = default_epsilon(kappa, sparsity, n).
  double epsilon = 0.0;
  std::size_t n_low_regret = 200;   // hard_subsampled block sizes
  std::size_t n_informative = 500;
  std::size_t num_actions = 50;     // random kind only
  double signal = 1.0;              // random kind: |theta_j| on the support
  double noise_std = 1.0;
  // Instance generation stream; independent of base_seed so that changing
  // replication seeds never changes the instance.
  std::uint64_t instance_seed = 1234;

  void validate() const;
};

struct PolicyConfig {
  std::string name;   // "estc" | "linucb" | "phased" | "rpe"
  std::string label;  // CSV identifier; defaults to name

  // estc / rpe.  sparsity 0 means: estc falls back to the n^{2/3} rule, rpe
  // uses the instance sparsity bound.  r_max 0 means max_x <x, theta>.
  std::size_t sparsity = 0;
  double r_max = 0.0;
  std::size_t explicit_n1 = 0;

  // rpe only; min_signal must be set (> 0) when name == "rpe".
  double min_signal = 0.0;
  double c1_constant = 1.0;
  std::size_t explicit_n2 = 0;

  // rpe + phased.
  double elimination_delta = 0.1;

  // linucb.
  double regularization = 1.0;
  double confidence_scale = 1.0;

  void validate() const;
};

struct ExperimentConfig {
  InstanceConfig instance;
  std::vector<PolicyConfig> policies;
  std::vector<std::size_t> horizons{1000};
  std::size_t replications = 1;
  std::uint64_t base_seed = 1;
  double design_tol = 1e-3;
  std::size_t max_trajectory_points = 1000;
  bool plot_bounds = false;
  std::string csv_path = "results.csv";
  std::string summary_path = "summary.csv";
  std::string svg_path = "regret.svg";

  void validate() const;
};

// Parse the single-document JSON config.  Every field has a default except
// the instance kind and the policy list.  Unknown fields are rejected.
// Throws std::invalid_argument with a descriptive message.
ExperimentConfig config_from_json(const std::string& text);

struct RunRecord {
  std::string policy;  // PolicyConfig label
  std::size_t horizon = 0;
  std::uint64_t seed = 0;  // base_seed + replication
  std::vector<double> cumulative;  // cumulative regret after rounds 1..horizon
  double final_regret = 0.0;

  // Diagnostics.
  std::size_t exploration_rounds = 0;  // n1 (estc) or n2 (rpe), else 0
  double kkt_residual = 0.0;
  bool lasso_converged = true;
  bool support_fallback = false;
  std::vector<std::size_t> support;    // recovered support (estc / rpe)
  std::size_t informative_pulls = 0;   // pulls of labelled informative actions
};

// Per-horizon instance and design diagnostics (one instance + design is built
// per horizon and shared across policies and replications).
struct HorizonSetup {
  std::size_t horizon = 0;
  double epsilon = 0.0;  // resolved epsilon (0 for the random kind)
  std::size_t num_actions = 0;
  double r_max = 0.0;            // max_x <x, theta>
  double c_min = 0.0;            // E-optimal design objective (0 if not built)
  double fw_gap = 0.0;
  std::size_t design_iterations = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<RunRecord> runs;       // ordered by (policy, horizon, seed)
  std::vector<HorizonSetup> setups;  // one per horizon, ascending
};

// Runs |policies| x |horizons| x replications seeded runs.  Replications run
// in parallel (capped by SPARSE_BANDIT_THREADS); output is identical to the
// serial order.  Invalid configs raise std::invalid_argument before any run.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Least-squares slope of log(median_regret) against log(horizon).
// Requires >= 3 horizons, strictly increasing, and positive regrets.
double loglog_slope(const std::vector<std::size_t>& horizons,
                    const std::vector<double>& median_regrets);

// --- statistics helpers ----------------------------------------------------

// Linear-interpolation quantile of `values` at p in [0, 1] (the convention
// used by numpy's default and R's type 7).  Throws if values is empty.
double quantile(std::vector<double> values, double p);

// Round grid kept when downsampling a trajectory of length `horizon` to at
// most `max_points` rows: multiples of ceil(horizon / max_points), plus the
// final round.
std::vector<std::size_t> sample_rounds(std::size_t horizon, std::size_t max_points);

struct SummaryRow {
  std::string policy;
  std::size_t horizon = 0;
  double median = 0.0;  // median final cumulative regret over seeds
  double iqr = 0.0;     // q75 - q25 of the same
};

std::vector<SummaryRow> summarize(const ExperimentResult& result);

// Median and quartile curves of cumulative regret per (policy, horizon),
// evaluated on the downsampled round grid.
struct RegretCurve {
  std::string policy;
  std::size_t horizon = 0;
  std::vector<std::size_t> rounds;
  std::vector<double> median;
  std::vector<double> lower;  // 25th percentile
  std::vector<double> upper;  // 75th percentile
};

std::vector<RegretCurve> summarize_curves(const ExperimentResult& result,
                                          std::size_t max_points);

// --- file emission ---------------------------------------------------------

// Long-form CSV: header policy,horizon,seed,round,cum_regret and one row per
// kept round per run.  Trajectories are downsampled to the config's
// max_trajectory_points; regret values at kept rounds are exact.
void emit_csv(const ExperimentResult& result, const std::string& path);

// Summary CSV: header policy,horizon,median,iqr with one row per
// (policy, horizon) in result order.
void emit_summary(const ExperimentResult& result, const std::string& path);

// Extra curves drawn dashed on the SVG (theoretical bounds).
struct BoundOverlay {
  std::string label;
  std::vector<std::size_t> rounds;
  std::vector<double> values;
};

// Native SVG: one median curve per (policy, horizon) with a shaded
// interquartile band, axes, and a legend.
void emit_svg(const std::vector<RegretCurve>& curves, const std::string& path,
              const std::vector<BoundOverlay>& overlays = {});

// Convenience wrapper: summarizes `result` and, when the config requests
// bound overlays and a design was computed, overlays the theoretical lower
// and upper regret bounds at the largest horizon.
void emit_svg(const ExperimentResult& result, const std::string& path);

// --- CSV re-ingestion (slope / plot subcommands) ---------------------------

std::vector<SummaryRow> summary_from_csv(const std::string& text);

std::vector<RegretCurve> curves_from_csv(const std::string& text);

}  // namespace sparsebandit
