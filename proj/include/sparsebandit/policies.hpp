#pragma once
// ===========================================================================
// Bandit policies.
//
//  * run_estc: explore-then-commit for sparse rewards -- sample a fixed
//    design for n1 rounds, Lasso-estimate theta, then commit to the greedy
//    action for the remainder.
//  * run_restricted_pe: Lasso support screening on n2 design rounds, then
//    phased elimination on the actions projected to the selected coordinates
//    (original arms are always the ones pulled).
//  * run_phased_elimination: classical G-optimal phased elimination.
//  * run_linucb: optimism baseline with ellipsoidal confidence sets.
//
// Each run returns its RegretTrajectory plus policy-specific diagnostics.
// ===========================================================================

#include <cstddef>
#include <vector>

#include "sparsebandit/design.hpp"
#include "sparsebandit/lasso.hpp"
#include "sparsebandit/model.hpp"
#include "sparsebandit/rng.hpp"

namespace sparsebandit {

// ceil(n^{2/3} (s^2 log 2d)^{1/3} r_max^{-2/3} (2 / c_min^2)^{1/3}),
// clamped to [1, n].
std::size_t exploration_length(std::size_t n, std::size_t d, std::size_t s,
                               double r_max, double c_min);

struct EstcConfig {
  std::size_t horizon = 0;
  std::size_t sparsity = 0;   // 0 = unknown; exploration falls back to ceil(n^{2/3})
  double r_max = 1.0;
  double c_min = 0.0;         // design value used by the exploration formula
  std::size_t explicit_n1 = 0;  // nonzero overrides the formula (clamped to [1, n])

  void validate() const;
  // explicit_n1 if set; the tuned formula when sparsity and c_min are known;
  // ceil(n^{2/3}) otherwise.
  std::size_t resolved_n1(std::size_t dim) const;
};

struct EstcResult {
  RegretTrajectory traj;
  LassoFit fit;                    // fit.converged records Lasso failure
  std::size_t n1 = 0;
  double lambda1 = 0.0;
  std::size_t committed_index = 0;
};

EstcResult run_estc(const ActionSet& actions, const SparseInstance& instance,
                    const EstcConfig& config, const DesignDistribution& design,
                    RngStream& rng);

struct RpeConfig {
  std::size_t horizon = 0;
  std::size_t sparsity = 0;        // s >= 1 (required)
  double min_signal = 0.0;         // m > 0; support threshold is m/2
  double c1_constant = 1.0;
  double elimination_delta = 0.1;  // in (0, 1)
  double c_min = 1.0;              // design value in the n2 formula
  std::size_t explicit_n2 = 0;     // nonzero overrides the formula

  void validate() const;
  // ceil(c1 * s * log(d) / (m^2 * c_min)) clamped to [1, horizon].
  std::size_t resolved_n2(std::size_t dim) const;
};

struct PhaseDiagnostics {
  std::size_t phases_completed = 0;
  std::vector<std::size_t> surviving;      // action indices still live at the end
  bool used_pinv = false;                  // a per-phase Gram needed the pseudo-inverse
  std::vector<std::size_t> dropped_coords; // estimation coordinates dropped as dependent
};

struct PhasedEliminationResult {
  RegretTrajectory traj;
  PhaseDiagnostics diag;
};

PhasedEliminationResult run_phased_elimination(const ActionSet& actions,
                                               const SparseInstance& instance,
                                               std::size_t horizon, double delta,
                                               RngStream& rng);

struct RpeResult {
  RegretTrajectory traj;
  LassoFit fit;
  std::size_t n2 = 0;
  double lambda2 = 0.0;
  std::vector<std::size_t> selected_support;  // Shat (original coordinates)
  bool support_fallback = false;  // Shat was empty; used argmax |theta_hat_j|
  PhaseDiagnostics elimination;
};

RpeResult run_restricted_pe(const ActionSet& actions, const SparseInstance& instance,
                            const RpeConfig& config, const DesignDistribution& design,
                            RngStream& rng);

struct LinUcbResult {
  RegretTrajectory traj;
  std::vector<double> theta_hat;  // final ridge estimate
};

// beta_t = confidence_scale * (sqrt(regularization) * ||theta||_2
//          + sqrt(2 log(1/delta) + d log(1 + t/(regularization d))))
// with delta = 1/horizon.
LinUcbResult run_linucb(const ActionSet& actions, const SparseInstance& instance,
                        std::size_t horizon, double regularization,
                        double confidence_scale, RngStream& rng);

}  // namespace sparsebandit
