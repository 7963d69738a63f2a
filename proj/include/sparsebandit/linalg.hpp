#pragma once
// ===========================================================================
// Self-contained dense linear algebra for small/medium symmetric problems.
//
//  * Mat: row-major dense matrix.
//  * eigh: full symmetric eigendecomposition (Householder tridiagonalization
//    + implicit-shift QL, with a cyclic-Jacobi fallback), ascending order.
//  * smallest_eigenvalue: value-only fast path via tridiagonalization and
//    Sturm-sequence bisection (used heavily by design line searches).
//  * rank_one_min_eigenvalue: smallest eigenvalue of diag(d) + rho*u*u^T via
//    the secular equation with deflation — lets the E-optimal line search
//    evaluate (1-g)*Sigma + g*x*x^T in O(d) given one eigendecomposition.
//  * cholesky / solve_spd: SPD solves with an eigen-pseudoinverse fallback
//    (callers can observe whether the fallback fired).
//  * pivoted_independent_columns: greedy pivoted Cholesky rank detection.
//  * power_iteration_max_eig: dominant eigenvalue of a PSD matrix.
//  * solve_lp: dense two-phase tableau simplex (Dantzig pricing with a Bland
//    anti-cycling fallback) for the cutting-plane master problems.
// ===========================================================================

#include <cstddef>
#include <string>
#include <vector>

namespace sparsebandit {

struct Mat {
  std::size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
  double* row(std::size_t i) { return a.data() + i * cols; }
  const double* row(std::size_t i) const { return a.data() + i * cols; }

  static Mat identity(std::size_t n);
};

std::vector<double> matvec(const Mat& A, const std::vector<double>& x);

// ---- Symmetric eigenproblems ----------------------------------------------

struct EighResult {
  std::vector<double> values;  // ascending
  Mat vectors;                 // column j is the eigenvector for values[j]
};

// Full eigendecomposition of a symmetric matrix (only the lower/upper
// symmetric part is assumed consistent).
EighResult eigh(const Mat& A);

// Cyclic Jacobi eigendecomposition; slower than eigh() but independent of the
// QL path.  Used as eigh()'s fallback and as a cross-check in tests.
EighResult jacobi_eigh(const Mat& A);

// Smallest eigenvalue only (no vectors), via Sturm bisection on the
// tridiagonal form.  rel_tol is relative to the Gershgorin spread.
double smallest_eigenvalue(const Mat& A, double rel_tol = 1e-13);

// Smallest eigenvalue of diag(d) + rho * u * u^T with d ascending and
// rho >= 0, by the secular equation with pole merging/deflation.
double rank_one_min_eigenvalue(const std::vector<double>& d,
                               const std::vector<double>& u, double rho);

// ---- Linear solves --------------------------------------------------------

// In-place Cholesky A = L L^T on the lower triangle; false if A is not
// numerically positive definite.
bool cholesky(Mat& A);

// Solve L L^T x = b given the factor from cholesky().
std::vector<double> cholesky_solve(const Mat& L, const std::vector<double>& b);

struct SpdSolveResult {
  std::vector<double> x;
  bool used_pinv = false;  // true if the eigen-pseudoinverse fallback fired
};

// Solve A x = b for symmetric positive (semi)definite A.  Tries Cholesky
// first; on failure falls back to the eigen-pseudoinverse with eigenvalues
// below pinv_rel_tol * lambda_max treated as zero.
SpdSolveResult solve_spd(const Mat& A, const std::vector<double>& b,
                         double pinv_rel_tol = 1e-12);

// Greedy pivoted Cholesky on a PSD Gram matrix: returns (sorted) indices of a
// maximal set of columns whose residual pivot exceeds rel_tol * max initial
// diagonal.
std::vector<std::size_t> pivoted_independent_columns(Mat G, double rel_tol = 1e-9);

// Dominant eigenvalue of a symmetric PSD matrix by power iteration with a
// deterministic start vector.
double power_iteration_max_eig(const Mat& A, int max_iters = 2000,
                               double tol = 1e-12);

// ---- Linear programming ---------------------------------------------------

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::IterLimit;
  std::vector<double> x;
  double objective = 0.0;
};

// Minimize c.x subject to A x (rel) b and x >= 0, where rel[i] is one of
// '<' (<=), '=' or '>' (>=).  Dense two-phase tableau simplex.
LpResult solve_lp(const Mat& A, const std::vector<double>& b,
                  const std::vector<double>& c, const std::string& rel);

}  // namespace sparsebandit
