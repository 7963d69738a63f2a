#pragma once

#include <cstddef>
#include <vector>

#include "sparsebandit/linalg.hpp"
#include "sparsebandit/model.hpp"
#include "sparsebandit/rng.hpp"

namespace sparsebandit {

// Parameters of the hard two-block environment: a low-regret block S of
// (s-1)-sparse sign vectors on the first d-1 coordinates, and an informative
// block H = {+/-kappa}^{d-1} x {1}.  theta = (eps,...,eps, 0,...,0, -1) with
// s-1 leading entries equal to eps.
struct HardInstanceSpec {
  std::size_t d = 0;
  std::size_t s = 0;
  double kappa = 1.0;    // in (0, 1]
  double epsilon = 0.0;  // > 0; see default_epsilon
  std::size_t n_informative = 500;  // subsample size drawn from H
  std::size_t n_low_regret = 200;   // subsample size drawn from S (includes x*)
  std::size_t enumeration_cap = 1000000;  // max |S| + |H| for full enumeration
  std::size_t candidate_cap = 100000;     // max candidates scanned by alternative_theta

  void validate() const;
};

struct ContextualSpec {
  std::size_t num_arms = 20;
  std::size_t dim = 100;
  std::size_t sparsity = 5;
  double rho = 0.0;  // in [0, 1); pairwise feature correlation is rho^2
  std::size_t horizon = 0;

  void validate() const;
};

struct HardInstance {
  ActionSet actions;
  SparseInstance instance;
  std::vector<std::size_t> low_regret;    // indices of the S block (x* is actions[0])
  std::vector<std::size_t> informative;   // indices of the H block
};

struct ContextualInstance {
  std::vector<ActionSet> rounds;  // one action set per round
  SparseInstance instance;
};

// Proof-tuned gap parameter kappa^{-2/3} s^{-2/3} n^{-1/3}.
double default_epsilon(double kappa, std::size_t s, std::size_t n);

// Full enumeration of both blocks; throws when |S| + |H| exceeds the cap with
// a message directing callers to subsample_hard_instance.
HardInstance hard_instance(const HardInstanceSpec& spec);

// Uniform without-replacement samples of n_low_regret actions from S (always
// including the optimal action x* as actions[0]) and n_informative from H.
HardInstance subsample_hard_instance(const HardInstanceSpec& spec, RngStream& rng);

// Alternative parameter theta + 2*eps*x~ where x~ minimises sum_t <A_t, x>^2
// over the (s-1)-sparse sign vectors supported on coordinates s-1..d-2 (which
// are disjoint from the support of theta).  Ties break toward the
// lexicographically smallest candidate.  When the candidate family exceeds
// spec.candidate_cap, that many candidates are sampled uniformly instead.
std::vector<double> alternative_theta(const std::vector<double>& theta,
                                      const HardInstanceSpec& spec,
                                      const std::vector<Action>& logged_actions,
                                      RngStream& rng);

// Exact Gaussian KL divergence (1/(2 sigma^2)) sum_x T_x <x, theta - theta~>^2
// for expected pull counts T_x >= 0.
double kl_between(const std::vector<double>& theta,
                  const std::vector<double>& theta_tilde,
                  const ActionSet& actions,
                  const std::vector<double>& pull_counts,
                  double noise_std = 1.0);

// Per-round Gaussian arm features: each coordinate is correlated across arms
// with pairwise correlation rho^2 (equicorrelated one-factor model), clipped
// to [-1, 1]; theta has `sparsity` entries of magnitude 1 at uniformly chosen
// coordinates with random signs.
ContextualInstance contextual_instance(const ContextualSpec& spec, RngStream& rng);

// Unclipped draws of the one-factor model used by contextual_instance: each
// row holds the num_arms correlated values of a single coordinate.  Exposed so
// the correlation structure can be checked without truncation bias.
Mat contextual_raw_features(const ContextualSpec& spec, std::size_t num_draws,
                            RngStream& rng);

// (exp(-4)/4) * min(c_min^{-1/3} s^{1/3} n^{2/3}, sqrt(d n)).
double lower_bound(std::size_t n, std::size_t d, std::size_t s, double c_min);

// (2 log(2d) R_max)^{1/3} C_min^{-2/3} s^{2/3} n^{2/3} + 3 n R_max exp(-c1 n1).
double estc_upper_bound(std::size_t n, std::size_t d, std::size_t s, double r_max,
                        double c_min, std::size_t n1, double c1);

// C * (s log d / (m^2 C_min) + sqrt(9 phi_max log(K n) / C_min) * sqrt(s n)).
double rpe_upper_bound(std::size_t n, std::size_t d, std::size_t s, double m,
                       double c_min, double phi_max, std::size_t num_actions,
                       double scale = 1.0);

}  // namespace sparsebandit
