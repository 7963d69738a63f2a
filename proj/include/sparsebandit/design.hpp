#pragma once
// ===========================================================================
// Experimental design solvers.
//
// solve_e_optimal maximizes the minimum eigenvalue of the design covariance
// E[A A^T] over probability distributions on the action set.  The objective
// is concave but nonsmooth where the minimum eigenvalue is repeated — which
// is exactly where the optima of interest live — so the solver runs two
// phases: classic Frank-Wolfe (supergradient = outer product of a minimum
// eigenvector; exact line search on the rank-one slice) until progress
// stalls, then a stabilized cutting-plane refinement whose master problem is
// the zero-sum game
//     max_{mu in simplex} min_{cuts v}  sum_x mu_x (v^T x)^2,
// solved exactly as an LP over all actions.  Every iteration maintains a
// certified upper bound on C_min (prefix-cluster dual witnesses + the LP
// value), so the reported fw_gap always dominates C_min - sigma_min.
//
// solve_g_optimal is standard Kiefer-Wolfowitz Frank-Wolfe for the G-optimal
// design (minimize the maximum leverage; optimum value = d).
// ===========================================================================

#include <cstddef>
#include <utility>
#include <vector>

#include "sparsebandit/linalg.hpp"
#include "sparsebandit/model.hpp"

namespace sparsebandit {

struct DesignDistribution {
  std::vector<std::pair<std::size_t, double>> atoms;  // (action index, weight)
  std::size_t dim = 0;
};

struct DesignCertificate {
  double objective = 0.0;   // sigma_min (E-optimal) or max leverage (G-optimal)
  double fw_gap = 0.0;      // certified optimality gap; always >= 0
  std::size_t iterations = 0;
};

// Sigma = sum_i w_i x_i x_i^T.  Validates the distribution invariants
// (indices in range, weights >= 0 summing to 1 within 1e-12).
Mat covariance(const DesignDistribution& design, const ActionSet& actions);

// Minimum eigenpair of a symmetric matrix; throws on asymmetric input.
std::pair<double, std::vector<double>> min_eigen(const Mat& matrix);

// E-optimal design.  Guarantees C_min(A) - objective <= fw_gap, and stops as
// soon as fw_gap <= tol.  Throws if the actions do not span R^d (C_min = 0)
// or tol <= 0.
std::pair<DesignDistribution, DesignCertificate> solve_e_optimal(
    const ActionSet& actions, double tol = 1e-3, std::size_t max_iter = 5000);

// Convenience wrapper returning just the E-optimal objective value.
double c_min(const ActionSet& actions, double tol = 1e-3);

// G-optimal design: Frank-Wolfe with the closed-form Kiefer-Wolfowitz step,
// stopping when max leverage <= (1 + tol) * d.
std::pair<DesignDistribution, DesignCertificate> solve_g_optimal(
    const ActionSet& actions, double tol = 1e-3, std::size_t max_iter = 5000);

}  // namespace sparsebandit
