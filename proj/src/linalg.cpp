#include "sparsebandit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sparsebandit/kernels.hpp"

namespace sparsebandit {

Mat Mat::identity(std::size_t n) {
  Mat I(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

std::vector<double> matvec(const Mat& A, const std::vector<double>& x) {
  if (x.size() != A.cols) throw std::invalid_argument("matvec: size mismatch");
  std::vector<double> y(A.rows);
  for (std::size_t i = 0; i < A.rows; ++i)
    y[i] = kernels::dot(A.row(i), x.data(), A.cols);
  return y;
}

// ---------------------------------------------------------------------------
// Householder tridiagonalization (optionally accumulating the orthogonal
// transform) followed by implicit-shift QL.  Classic EISPACK tred2/tql2
// structure, 0-indexed.
// ---------------------------------------------------------------------------
namespace {

// On return, diag/off hold the tridiagonal form (off[i] couples i and i+1).
// If accumulate, A is overwritten with the orthogonal Q such that
// Q^T A_orig Q = T; otherwise A's contents are scratch.
void householder_tridiag(Mat& A, std::vector<double>& diag,
                         std::vector<double>& off, bool accumulate) {
  const std::size_t n = A.rows;
  diag.assign(n, 0.0);
  std::vector<double> e(n, 0.0);  // e[i] couples i-1 and i
  if (n == 0) return;
  if (n == 1) {
    diag[0] = A(0, 0);
    off.assign(0, 0.0);
    if (accumulate) A(0, 0) = 1.0;
    return;
  }

  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(A(i, k));
      if (scale == 0.0) {
        e[i] = A(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          A(i, k) /= scale;
          h += A(i, k) * A(i, k);
        }
        double f = A(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        A(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          if (accumulate) A(j, i) = A(i, j) / h;
          g = 0.0;
          for (std::size_t k = 0; k <= j; ++k) g += A(j, k) * A(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) g += A(k, j) * A(i, k);
          e[j] = g / h;
          f += e[j] * A(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = A(i, j);
          const double ej = e[j] - hh * f;
          e[j] = ej;
          for (std::size_t k = 0; k <= j; ++k)
            A(j, k) -= f * e[k] + ej * A(i, k);
        }
      }
    } else {
      e[i] = A(i, l);
    }
    diag[i] = h;
  }

  diag[0] = 0.0;
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (accumulate) {
      if (diag[i] != 0.0) {
        for (std::size_t j = 0; j < i; ++j) {
          double g = 0.0;
          for (std::size_t k = 0; k < i; ++k) g += A(i, k) * A(k, j);
          for (std::size_t k = 0; k < i; ++k) A(k, j) -= g * A(k, i);
        }
      }
      diag[i] = A(i, i);
      A(i, i) = 1.0;
      for (std::size_t j = 0; j < i; ++j) A(j, i) = A(i, j) = 0.0;
    } else {
      diag[i] = A(i, i);
    }
  }

  off.assign(n - 1, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = e[i + 1];
}

// Implicit-shift QL on a tridiagonal matrix; rotations are applied to the
// columns of V when V != nullptr.  Returns false if an eigenvalue fails to
// converge (caller falls back to Jacobi).
bool tridiag_ql(std::vector<double>& diag, std::vector<double>& off, Mat* V) {
  const std::size_t n = diag.size();
  if (n <= 1) return true;
  std::vector<double> e(off);
  e.push_back(0.0);  // e[i] couples i and i+1; e[n-1] sentinel

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    for (;;) {
      std::size_t m = l;
      while (m + 1 < n) {
        const double dd = std::fabs(diag[m]) + std::fabs(diag[m + 1]);
        if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
        ++m;
      }
      if (m == l) break;
      if (++iter > 60) return false;
      double g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = diag[m] - diag[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      bool underflow = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          diag[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = diag[i + 1] - p;
        r = (diag[i] - g) * s + 2.0 * c * b;
        p = s * r;
        diag[i + 1] = g + p;
        g = c * r - b;
        if (V != nullptr) {
          for (std::size_t k = 0; k < n; ++k) {
            f = (*V)(k, i + 1);
            (*V)(k, i + 1) = s * (*V)(k, i) + c * f;
            (*V)(k, i) = c * (*V)(k, i) - s * f;
          }
        }
      }
      if (underflow) continue;
      diag[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
  off.assign(e.begin(), e.end() - 1);
  return true;
}

void sort_eigh_ascending(EighResult& r) {
  const std::size_t n = r.values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return r.values[a] < r.values[b]; });
  std::vector<double> vals(n);
  Mat vecs(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    vals[j] = r.values[order[j]];
    for (std::size_t i = 0; i < n; ++i) vecs(i, j) = r.vectors(i, order[j]);
  }
  r.values = std::move(vals);
  r.vectors = std::move(vecs);
}

}  // namespace

EighResult jacobi_eigh(const Mat& A) {
  if (A.rows != A.cols) throw std::invalid_argument("jacobi_eigh: non-square");
  const std::size_t n = A.rows;
  Mat S = A;
  // Symmetrize so a stray asymmetry from accumulation cannot bias rotations.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      S(i, j) = S(j, i) = 0.5 * (S(i, j) + S(j, i));
  Mat V = Mat::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double offdiag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) offdiag += S(i, j) * S(i, j);
    if (offdiag <= 1e-30 * (1.0 + std::fabs(S(0, 0)))) break;
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) norm += S(i, j) * S(i, j);
    if (offdiag <= norm * 1e-28) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = S(p, q);
        if (std::fabs(apq) <=
            1e-18 * (std::fabs(S(p, p)) + std::fabs(S(q, q)) + 1e-300))
          continue;
        const double theta = (S(q, q) - S(p, p)) / (2.0 * apq);
        const double t = std::copysign(
            1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0)), theta);
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = S(k, p), skq = S(k, q);
          S(k, p) = c * skp - s * skq;
          S(k, q) = s * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = S(p, k), sqk = S(q, k);
          S(p, k) = c * spk - s * sqk;
          S(q, k) = s * spk + c * sqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  EighResult r;
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.values[i] = S(i, i);
  r.vectors = std::move(V);
  sort_eigh_ascending(r);
  return r;
}

EighResult eigh(const Mat& A) {
  if (A.rows != A.cols) throw std::invalid_argument("eigh: non-square");
  const std::size_t n = A.rows;
  EighResult r;
  if (n == 0) {
    r.vectors = Mat(0, 0);
    return r;
  }
  Mat Q = A;
  // Symmetrize defensively; callers accumulate covariances by rank-one
  // updates and tiny asymmetries would otherwise leak into the reduction.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      Q(i, j) = Q(j, i) = 0.5 * (Q(i, j) + Q(j, i));
  std::vector<double> diag, off;
  householder_tridiag(Q, diag, off, /*accumulate=*/true);
  if (!tridiag_ql(diag, off, &Q)) return jacobi_eigh(A);
  r.values = std::move(diag);
  r.vectors = std::move(Q);
  sort_eigh_ascending(r);
  return r;
}

double smallest_eigenvalue(const Mat& A, double rel_tol) {
  if (A.rows != A.cols) throw std::invalid_argument("smallest_eigenvalue: non-square");
  const std::size_t n = A.rows;
  if (n == 0) return 0.0;
  if (n == 1) return A(0, 0);
  Mat scratch = A;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      scratch(i, j) = scratch(j, i) = 0.5 * (scratch(i, j) + scratch(j, i));
  std::vector<double> diag, off;
  householder_tridiag(scratch, diag, off, /*accumulate=*/false);

  // Gershgorin bracket for the spectrum of the tridiagonal form.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::fabs(off[i - 1]);
    if (i + 1 < n) radius += std::fabs(off[i]);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }
  const double spread = std::max(hi - lo, 1e-300);
  const double tiny = 1e-300;

  // count(t) = number of eigenvalues strictly below t (Sturm sequence).
  auto count_below = [&](double t) {
    int cnt = 0;
    double q = diag[0] - t;
    if (q < 0.0) ++cnt;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(q) < tiny) q = -tiny;
      q = diag[i] - t - off[i - 1] * off[i - 1] / q;
      if (q < 0.0) ++cnt;
    }
    return cnt;
  };

  double a = lo, b = hi;
  // Invariant: count_below(a) == 0 and count_below(b + eps) >= 1; we close in
  // on the smallest eigenvalue.
  for (int it = 0; it < 200 && (b - a) > rel_tol * spread; ++it) {
    const double mid = 0.5 * (a + b);
    if (count_below(mid) >= 1)
      b = mid;
    else
      a = mid;
  }
  return 0.5 * (a + b);
}

double rank_one_min_eigenvalue(const std::vector<double>& d,
                               const std::vector<double>& u, double rho) {
  const std::size_t n = d.size();
  if (u.size() != n) throw std::invalid_argument("rank_one_min_eigenvalue: size mismatch");
  if (n == 0) return 0.0;
  if (rho <= 0.0) return d.front();  // d is ascending

  const double span =
      std::max({std::fabs(d.front()), std::fabs(d.back()), 1e-300});
  const double merge_eps = 1e-12 * std::max(span, 1.0);

  // Merge coincident poles and drop negligible weights.  A dropped pole's
  // value stays an exact eigenvalue; a merged pole of multiplicity m keeps
  // m-1 eigenvalues at its value.
  struct Pole {
    double val, w;
    int mult;
  };
  std::vector<Pole> poles;
  double total_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) total_w += u[i] * u[i];
  const double w_eps = 1e-28 * std::max(total_w, 1e-300);

  double deflated_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = u[i] * u[i];
    if (w <= w_eps) {
      deflated_min = std::min(deflated_min, d[i]);
      continue;
    }
    if (!poles.empty() && d[i] - poles.back().val <= merge_eps) {
      poles.back().w += w;
      poles.back().mult += 1;
    } else {
      poles.push_back({d[i], w, 1});
    }
  }
  for (const Pole& p : poles)
    if (p.mult >= 2) deflated_min = std::min(deflated_min, p.val);

  if (poles.empty()) return d.front();

  double root;
  if (poles.size() == 1) {
    root = poles[0].val + rho * poles[0].w;
  } else {
    // Smallest secular root lies in (poles[0].val, poles[1].val).
    const double p0 = poles[0].val, p1 = poles[1].val;
    auto f = [&](double lam) {
      double s = 1.0;
      for (const Pole& p : poles) s += rho * p.w / (p.val - lam);
      return s;
    };
    double delta = (p1 - p0) * 1e-12;
    double a = p0 + delta, b = p1 - delta;
    // Push the bracket off the poles until the signs are right.
    for (int guard = 0; guard < 60 && f(a) > 0.0; ++guard) {
      delta *= 0.125;
      a = p0 + delta;
    }
    for (int guard = 0; guard < 60 && f(b) < 0.0; ++guard) {
      delta *= 0.125;
      b = p1 - delta;
    }
    for (int it = 0; it < 200 && b - a > 1e-16 * std::max(span, 1.0); ++it) {
      const double mid = 0.5 * (a + b);
      if (f(mid) < 0.0)
        a = mid;
      else
        b = mid;
    }
    root = 0.5 * (a + b);
  }
  return std::min(root, deflated_min);
}

// ---------------------------------------------------------------------------
// SPD solves
// ---------------------------------------------------------------------------

bool cholesky(Mat& A) {
  if (A.rows != A.cols) throw std::invalid_argument("cholesky: non-square");
  const std::size_t n = A.rows;
  for (std::size_t j = 0; j < n; ++j) {
    double diag = A(j, j) - kernels::sumsq(A.row(j), j);
    if (diag <= 0.0 || !std::isfinite(diag)) return false;
    diag = std::sqrt(diag);
    A(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double v = A(i, j) - kernels::dot(A.row(i), A.row(j), j);
      A(i, j) = v / diag;
    }
  }
  // Zero the strict upper triangle so the factor is unambiguous.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) A(i, j) = 0.0;
  return true;
}

std::vector<double> cholesky_solve(const Mat& L, const std::vector<double>& b) {
  const std::size_t n = L.rows;
  if (b.size() != n) throw std::invalid_argument("cholesky_solve: size mismatch");
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = (b[i] - kernels::dot(L.row(i), y.data(), i)) / L(i, i);
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
    x[i] = s / L(i, i);
  }
  return x;
}

SpdSolveResult solve_spd(const Mat& A, const std::vector<double>& b,
                         double pinv_rel_tol) {
  SpdSolveResult out;
  Mat L = A;
  if (cholesky(L)) {
    out.x = cholesky_solve(L, b);
    return out;
  }
  // Eigen-pseudoinverse fallback for singular / semidefinite systems.
  const EighResult ed = eigh(A);
  const std::size_t n = A.rows;
  double lam_max = 0.0;
  for (double v : ed.values) lam_max = std::max(lam_max, std::fabs(v));
  const double cut = pinv_rel_tol * std::max(lam_max, 1e-300);
  std::vector<double> coef(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::fabs(ed.values[j]) <= cut) continue;
    double vb = 0.0;
    for (std::size_t i = 0; i < n; ++i) vb += ed.vectors(i, j) * b[i];
    coef[j] = vb / ed.values[j];
  }
  out.x.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (coef[j] == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) out.x[i] += ed.vectors(i, j) * coef[j];
  }
  out.used_pinv = true;
  return out;
}

std::vector<std::size_t> pivoted_independent_columns(Mat G, double rel_tol) {
  if (G.rows != G.cols) throw std::invalid_argument("pivoted_independent_columns: non-square");
  const std::size_t n = G.rows;
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = G(i, i);
  double max0 = 0.0;
  for (double v : diag) max0 = std::max(max0, v);
  const double cut = std::max(rel_tol * max0, 1e-300);

  std::vector<std::size_t> chosen;
  std::vector<char> used(n, 0);
  // Rows of the growing Cholesky factor restricted to all n columns:
  // fac[k][j] = L(j, k) for pivot k.
  std::vector<std::vector<double>> fac;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t p = n;
    double best = cut;
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j] && diag[j] > best) {
        best = diag[j];
        p = j;
      }
    if (p == n) break;
    used[p] = 1;
    chosen.push_back(p);
    const double piv = std::sqrt(diag[p]);
    std::vector<double> col(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] && j != p) continue;
      double v = G(j, p);
      for (const auto& f : fac) v -= f[j] * f[p];
      col[j] = v / piv;
    }
    col[p] = piv;
    for (std::size_t j = 0; j < n; ++j)
      if (!used[j]) diag[j] = std::max(0.0, diag[j] - col[j] * col[j]);
    fac.push_back(std::move(col));
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

double power_iteration_max_eig(const Mat& A, int max_iters, double tol) {
  const std::size_t n = A.rows;
  if (n == 0) return 0.0;
  // Deterministic quasi-random start vector (mixed integer hash), so the
  // estimate is reproducible and almost surely not orthogonal to the
  // dominant eigenvector.
  std::vector<double> v(n);
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= (i + 1) * 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
    h *= 0x94d049bb133111ebULL;
    v[i] = 0.5 + static_cast<double>(h >> 40) / 16777216.0;  // in [0.5, 1.5)
  }
  double norm = std::sqrt(kernels::sumsq(v.data(), n));
  for (auto& x : v) x /= norm;

  double lam = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> w = matvec(A, v);
    const double lam_new = kernels::dot(v.data(), w.data(), n);
    norm = std::sqrt(kernels::sumsq(w.data(), n));
    if (norm <= 1e-300) return 0.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (it > 0 && std::fabs(lam_new - lam) <= tol * std::max(1.0, std::fabs(lam_new))) {
      return lam_new;
    }
    lam = lam_new;
  }
  return lam;
}

// ---------------------------------------------------------------------------
// Two-phase tableau simplex
// ---------------------------------------------------------------------------
namespace {

constexpr double kLpEps = 1e-9;

struct Tableau {
  std::size_t m, ncols;          // rows, total columns (excl. rhs)
  std::vector<double> t;         // m x (ncols + 1), row-major, rhs last
  std::vector<double> cost;      // ncols + 1 (last = -objective)
  std::vector<std::size_t> basis;  // size m
  std::vector<char> blocked;     // columns barred from entering

  double& at(std::size_t i, std::size_t j) { return t[i * (ncols + 1) + j]; }
  double& rhs(std::size_t i) { return t[i * (ncols + 1) + ncols]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t w = ncols + 1;
    double* prow = &t[pr * w];
    const double inv = 1.0 / prow[pc];
    for (std::size_t j = 0; j < w; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == pr) continue;
      double* row = &t[i * w];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    const double f = cost[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < w; ++j) cost[j] -= f * prow[j];
      cost[pc] = 0.0;
    }
    basis[pr] = pc;
  }

  // Returns Optimal / Unbounded / IterLimit for the current cost row.
  LpStatus iterate(std::size_t max_iters) {
    std::size_t degenerate_run = 0;
    const std::size_t bland_after = 4 * (m + ncols) + 64;
    for (std::size_t it = 0; it < max_iters; ++it) {
      // Pricing.
      std::size_t pc = ncols;
      if (degenerate_run < bland_after) {
        double best = -kLpEps;
        for (std::size_t j = 0; j < ncols; ++j)
          if (!blocked[j] && cost[j] < best) {
            best = cost[j];
            pc = j;
          }
      } else {  // Bland's rule: first improving column
        for (std::size_t j = 0; j < ncols; ++j)
          if (!blocked[j] && cost[j] < -kLpEps) {
            pc = j;
            break;
          }
      }
      if (pc == ncols) return LpStatus::Optimal;

      // Ratio test; ties go to the smallest basis index (anti-cycling).
      std::size_t pr = m;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double a = at(i, pc);
        if (a <= kLpEps) continue;
        const double ratio = rhs(i) / a;
        if (pr == m || ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && basis[i] < basis[pr])) {
          best_ratio = ratio;
          pr = i;
        }
      }
      if (pr == m) return LpStatus::Unbounded;
      degenerate_run = (best_ratio <= 1e-12) ? degenerate_run + 1 : 0;
      pivot(pr, pc);
    }
    return LpStatus::IterLimit;
  }
};

}  // namespace

LpResult solve_lp(const Mat& A, const std::vector<double>& b,
                  const std::vector<double>& c, const std::string& rel) {
  const std::size_t m = A.rows, n = A.cols;
  if (b.size() != m || c.size() != n || rel.size() != m)
    throw std::invalid_argument("solve_lp: size mismatch");

  // Normalize rows to b >= 0 and equilibrate each row to max-abs ~1.
  Mat Aw = A;
  std::vector<double> bw = b;
  std::string rw = rel;
  for (std::size_t i = 0; i < m; ++i) {
    if (bw[i] < 0.0) {
      bw[i] = -bw[i];
      for (std::size_t j = 0; j < n; ++j) Aw(i, j) = -Aw(i, j);
      rw[i] = (rw[i] == '<') ? '>' : (rw[i] == '>') ? '<' : '=';
    }
    double mx = std::fabs(bw[i]);
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, std::fabs(Aw(i, j)));
    if (mx > 1e-300) {
      const double s = 1.0 / mx;
      bw[i] *= s;
      for (std::size_t j = 0; j < n; ++j) Aw(i, j) *= s;
    }
  }

  std::size_t n_slack = 0, n_art = 0;
  for (char r : rw) {
    if (r == '<' || r == '>') ++n_slack;
    if (r == '>' || r == '=') ++n_art;
  }

  Tableau T;
  T.m = m;
  T.ncols = n + n_slack + n_art;
  T.t.assign(m * (T.ncols + 1), 0.0);
  T.cost.assign(T.ncols + 1, 0.0);
  T.basis.assign(m, 0);
  T.blocked.assign(T.ncols, 0);

  std::size_t slack_at = n, art_at = n + n_slack;
  std::vector<char> is_art(T.ncols, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T.at(i, j) = Aw(i, j);
    T.rhs(i) = bw[i];
    switch (rw[i]) {
      case '<':
        T.at(i, slack_at) = 1.0;
        T.basis[i] = slack_at++;
        break;
      case '>':
        T.at(i, slack_at) = -1.0;
        ++slack_at;
        T.at(i, art_at) = 1.0;
        is_art[art_at] = 1;
        T.basis[i] = art_at++;
        break;
      case '=':
        T.at(i, art_at) = 1.0;
        is_art[art_at] = 1;
        T.basis[i] = art_at++;
        break;
      default:
        throw std::invalid_argument("solve_lp: rel must be one of '<', '=', '>'");
    }
  }

  const std::size_t max_iters = 200 * (m + T.ncols) + 1000;
  LpResult out;

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    for (std::size_t j = 0; j < T.ncols; ++j) T.cost[j] = is_art[j] ? 1.0 : 0.0;
    T.cost[T.ncols] = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_art[T.basis[i]]) continue;
      const std::size_t w = T.ncols + 1;
      for (std::size_t j = 0; j < w; ++j) T.cost[j] -= T.t[i * w + j];
    }
    const LpStatus s1 = T.iterate(max_iters);
    if (s1 == LpStatus::IterLimit) {
      out.status = LpStatus::IterLimit;
      return out;
    }
    const double phase1 = -T.cost[T.ncols];
    if (phase1 > 1e-7) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    // Drive remaining artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_art[T.basis[i]]) continue;
      std::size_t pc = T.ncols;
      for (std::size_t j = 0; j < T.ncols; ++j)
        if (!is_art[j] && std::fabs(T.at(i, j)) > 1e-8) {
          pc = j;
          break;
        }
      if (pc != T.ncols) T.pivot(i, pc);
      // else: redundant row; the artificial stays basic at value ~0.
    }
    for (std::size_t j = 0; j < T.ncols; ++j)
      if (is_art[j]) T.blocked[j] = 1;
  }

  // Phase 2: minimize the true objective.
  std::fill(T.cost.begin(), T.cost.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) T.cost[j] = c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const double cb = T.cost[T.basis[i]];
    if (cb == 0.0) continue;
    const std::size_t w = T.ncols + 1;
    for (std::size_t j = 0; j < w; ++j) T.cost[j] -= cb * T.t[i * w + j];
  }
  const LpStatus s2 = T.iterate(max_iters);
  if (s2 != LpStatus::Optimal) {
    out.status = s2;
    return out;
  }

  out.status = LpStatus::Optimal;
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (T.basis[i] < n) out.x[T.basis[i]] = T.rhs(i);
  out.objective = kernels::dot(c.data(), out.x.data(), n);
  return out;
}

}  // namespace sparsebandit
