#pragma once
// ===========================================================================
// Core model: actions, environments, reward sampling, and regret accounting.
//
// A bandit environment is a SparseInstance (sparse parameter vector theta,
// sparsity budget s, Gaussian noise) paired with a finite ActionSet whose
// actions are bounded in the max norm.  RegretTrajectory records one
// replication of a policy: per-round action index, sampled reward, and
// instantaneous regret, plus a counter of rounds spent in a designated
// "informative" subset of actions.
// ===========================================================================

#include <cstddef>
#include <vector>

#include "sparsebandit/rng.hpp"

namespace sparsebandit {

struct Action {
  std::vector<double> coords;

  std::size_t dim() const { return coords.size(); }
  double dot(const std::vector<double>& v) const;
  bool operator==(const Action& o) const { return coords == o.coords; }
};

class ActionSet {
 public:
  // Validates: non-empty, consistent dimension, ||x||_inf <= 1, no exact
  // duplicates.  Throws std::invalid_argument on violation.
  ActionSet(std::vector<Action> actions, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return actions_.size(); }
  const Action& operator[](std::size_t i) const { return actions_[i]; }
  const std::vector<Action>& actions() const { return actions_; }

 private:
  std::vector<Action> actions_;
  std::size_t dim_;
};

struct SparseInstance {
  std::vector<double> theta;
  std::size_t sparsity_bound = 0;
  double noise_std = 1.0;

  // Validates ||theta||_0 <= sparsity_bound and noise_std >= 0 (zero noise is
  // allowed for tests; the default model uses noise_std > 0).
  void validate() const;
  std::size_t dim() const { return theta.size(); }
};

struct TrajectoryStep {
  std::size_t round;         // 1-based
  std::size_t action_index;  // index into the ActionSet
  double reward;
  double instant_regret;     // gap of the played action
};

struct RegretTrajectory {
  std::vector<TrajectoryStep> steps;
  std::vector<double> cumulative;      // running sum of instant_regret
  std::size_t informative_pulls = 0;   // rounds whose action is in a
                                       // designated subset (see recount)

  void record(std::size_t action_index, double reward, double instant_regret);
  std::size_t rounds() const { return steps.size(); }
  double total_regret() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
  // Recompute informative_pulls as the number of rounds whose action index
  // lies in `subset` (a sorted-or-not list of indices).
  void recount_informative(const std::vector<std::size_t>& subset);
};

// argmax over actions of <x, theta>; ties broken by lowest index.
// Returns (index, value).  Throws on dimension mismatch.
std::pair<std::size_t, double> optimal_action(const SparseInstance& instance,
                                              const ActionSet& actions);

// <action, theta> + eta, eta ~ Normal(0, noise_std^2) drawn from rng.
double sample_reward(const SparseInstance& instance, const Action& action,
                     RngStream& rng);

// <x*, theta> - <x_index, theta>  (>= 0 up to roundoff).
double suboptimality_gap(const SparseInstance& instance, const ActionSet& actions,
                         std::size_t index);

// All suboptimality gaps at once (one optimal_action scan, then K dots).
std::vector<double> all_gaps(const SparseInstance& instance,
                             const ActionSet& actions);

}  // namespace sparsebandit
