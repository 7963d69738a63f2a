#pragma once
// ===========================================================================
// Lasso solver: cyclic coordinate descent with residual maintenance and
// active-set refinement, minimizing
//     (1/n) ||y - X theta||^2  +  lambda ||theta||_1.
//
// The stationarity conditions use the calculus-consistent factor 2 from
// differentiating the (1/n)-scaled residual sum of squares:
//     theta_j = 0:   |(2/n) X_j^T (y - X theta)| <= lambda
//     theta_j != 0:  (2/n) X_j^T (y - X theta) = lambda * sign(theta_j).
// kkt_residual measures the worst violation (relative to lambda for the
// inactive conditions, absolute for the active ones).
// ===========================================================================

#include <cstddef>
#include <vector>

#include "sparsebandit/linalg.hpp"

namespace sparsebandit {

struct LassoFit {
  std::vector<double> coefficients;       // length d
  double lambda = 0.0;
  double kkt_residual = 0.0;              // at the returned coefficients
  std::size_t iterations = 0;             // coordinate-descent sweeps executed
  std::vector<std::size_t> support;       // {j : |coef_j| > 1e-6}, ascending
  double max_design_eigen = 0.0;          // largest eigenvalue of (1/n) X^T X
  bool converged = false;                 // false if max_iter ran out first
};

inline constexpr double kSupportThreshold = 1e-6;

// X is n x d (rows = observations).  Requires lambda >= 0, n >= 1, matching
// shapes; throws std::invalid_argument otherwise.  If max_iter sweeps pass
// without meeting the KKT tolerance the best iterate is returned with
// converged = false.
LassoFit fit_lasso(const Mat& X, const std::vector<double>& y, double lambda,
                   double tol = 1e-7, std::size_t max_iter = 100000);

// 4 * sqrt(log(d) / n); requires n >= 1, d >= 2.
double lambda_schedule(std::size_t n, std::size_t d);

// {j : |coefficients_j| > threshold}, ascending (0-based indices).
std::vector<std::size_t> support(const LassoFit& fit,
                                 double threshold = kSupportThreshold);

// Worst-case violation of the stationarity conditions at `coefficients`.
double kkt_residual(const std::vector<double>& coefficients, const Mat& X,
                    const std::vector<double>& y, double lambda);

}  // namespace sparsebandit
