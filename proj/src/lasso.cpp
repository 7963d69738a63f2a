#include "sparsebandit/lasso.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "sparsebandit/kernels.hpp"

namespace sparsebandit {

namespace {

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Worst KKT violation given the gradient terms g_j = (2/n) X_j^T (y - X theta).
double kkt_from_gradients(const std::vector<double>& theta,
                          const std::vector<double>& g, double lambda) {
  double worst = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double viol;
    if (theta[j] == 0.0) {
      viol = (lambda > 0.0) ? std::max(0.0, (std::fabs(g[j]) - lambda) / lambda)
                            : std::fabs(g[j]);
    } else {
      viol = std::fabs(g[j] - lambda * (theta[j] > 0.0 ? 1.0 : -1.0));
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

// Largest eigenvalue of (1/n) X^T X by power iteration on v -> X^T (X v) / n,
// with a deterministic start vector.
double design_max_eigen(const std::vector<double>& Xc, std::size_t n,
                        std::size_t d) {
  if (n == 0 || d == 0) return 0.0;
  std::vector<double> v(d), Xv(n), w(d);
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (std::size_t j = 0; j < d; ++j) {
    h ^= (j + 1) * 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 29;
    h *= 0x94d049bb133111ebULL;
    v[j] = 0.5 + static_cast<double>(h >> 40) / 16777216.0;
  }
  double norm = std::sqrt(kernels::sumsq(v.data(), d));
  for (auto& x : v) x /= norm;
  double lam = 0.0;
  for (int it = 0; it < 500; ++it) {
    std::fill(Xv.begin(), Xv.end(), 0.0);
    for (std::size_t j = 0; j < d; ++j)
      if (v[j] != 0.0) kernels::axpy(v[j], &Xc[j * n], Xv.data(), n);
    for (std::size_t j = 0; j < d; ++j)
      w[j] = kernels::dot(&Xc[j * n], Xv.data(), n) / static_cast<double>(n);
    const double lam_new = kernels::dot(v.data(), w.data(), d);
    norm = std::sqrt(kernels::sumsq(w.data(), d));
    if (norm <= 1e-300) return 0.0;
    for (std::size_t j = 0; j < d; ++j) v[j] = w[j] / norm;
    if (it > 0 && std::fabs(lam_new - lam) <= 1e-10 * std::max(1.0, lam_new))
      return lam_new;
    lam = lam_new;
  }
  return lam;
}

}  // namespace

LassoFit fit_lasso(const Mat& X, const std::vector<double>& y, double lambda,
                   double tol, std::size_t max_iter) {
  const std::size_t n = X.rows, d = X.cols;
  if (n == 0 || d == 0) throw std::invalid_argument("fit_lasso: empty problem");
  if (y.size() != n) throw std::invalid_argument("fit_lasso: y length mismatch");
  if (!(lambda >= 0.0)) throw std::invalid_argument("fit_lasso: lambda must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("fit_lasso: tol must be > 0");

  // Column-major copy so each coordinate update streams one contiguous column.
  std::vector<double> Xc(d * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) Xc[j * n + i] = X(i, j);

  const double inv_n2 = 2.0 / static_cast<double>(n);
  std::vector<double> curvature(d);
  for (std::size_t j = 0; j < d; ++j)
    curvature[j] = inv_n2 * kernels::sumsq(&Xc[j * n], n);

  std::vector<double> theta(d, 0.0);
  std::vector<double> r = y;  // residual y - X theta, maintained incrementally

#ifndef NDEBUG
  auto objective = [&]() {
    double l1 = 0.0;
    for (double t : theta) l1 += std::fabs(t);
    return kernels::sumsq(r.data(), n) / static_cast<double>(n) + lambda * l1;
  };
  double prev_obj = objective();
#endif

  auto sweep = [&](const std::vector<std::size_t>& coords) {
    double max_change = 0.0;
    for (std::size_t j : coords) {
      if (curvature[j] == 0.0) continue;  // all-zero column stays at 0
      const double* col = &Xc[j * n];
      const double g = inv_n2 * kernels::dot(col, r.data(), n) +
                       curvature[j] * theta[j];
      const double fresh = soft_threshold(g, lambda) / curvature[j];
      const double delta = fresh - theta[j];
      if (delta != 0.0) {
        kernels::axpy(-delta, col, r.data(), n);
        theta[j] = fresh;
        max_change = std::max(max_change, std::fabs(delta));
      }
    }
    return max_change;
  };

  std::vector<std::size_t> all_coords(d), active;
  for (std::size_t j = 0; j < d; ++j) all_coords[j] = j;

  auto gradients = [&](std::vector<double>& g) {
    for (std::size_t j = 0; j < d; ++j)
      g[j] = inv_n2 * kernels::dot(&Xc[j * n], r.data(), n);
  };

  LassoFit fit;
  fit.lambda = lambda;
  std::vector<double> g(d);
  std::size_t it = 0;
  bool converged = false;
  double kkt = 0.0;
  int since_full = 0;

  while (it < max_iter) {
    const bool full = active.empty() || since_full >= 10;
    const double change = sweep(full ? all_coords : active);
    ++it;
#ifndef NDEBUG
    const double obj = objective();
    assert(obj <= prev_obj + 1e-10 * (1.0 + std::fabs(prev_obj)));
    prev_obj = obj;
#endif
    if (full) {
      since_full = 0;
      active.clear();
      for (std::size_t j = 0; j < d; ++j)
        if (theta[j] != 0.0) active.push_back(j);
    } else {
      ++since_full;
    }

    double theta_max = 0.0;
    for (double t : theta) theta_max = std::max(theta_max, std::fabs(t));
    if (change < tol * (1.0 + theta_max)) {
      if (!full) {
        since_full = 10;  // force a full sweep before testing optimality
        continue;
      }
      gradients(g);
      kkt = kkt_from_gradients(theta, g, lambda);
      if (kkt <= tol) {
        converged = true;
        break;
      }
    }
  }

  if (!converged) {
    gradients(g);
    kkt = kkt_from_gradients(theta, g, lambda);
    converged = kkt <= tol;
  }

  fit.coefficients = std::move(theta);
  fit.kkt_residual = kkt;
  fit.iterations = it;
  fit.converged = converged;
  fit.support = support(fit, kSupportThreshold);
  fit.max_design_eigen = design_max_eigen(Xc, n, d);
  return fit;
}

double lambda_schedule(std::size_t n, std::size_t d) {
  if (n < 1) throw std::invalid_argument("lambda_schedule: n must be >= 1");
  if (d < 2) throw std::invalid_argument("lambda_schedule: d must be >= 2");
  return 4.0 * std::sqrt(std::log(static_cast<double>(d)) / static_cast<double>(n));
}

std::vector<std::size_t> support(const LassoFit& fit, double threshold) {
  if (!(threshold >= 0.0))
    throw std::invalid_argument("support: threshold must be >= 0");
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < fit.coefficients.size(); ++j)
    if (std::fabs(fit.coefficients[j]) > threshold) idx.push_back(j);
  return idx;
}

double kkt_residual(const std::vector<double>& coefficients, const Mat& X,
                    const std::vector<double>& y, double lambda) {
  const std::size_t n = X.rows, d = X.cols;
  if (coefficients.size() != d || y.size() != n)
    throw std::invalid_argument("kkt_residual: shape mismatch");
  std::vector<double> r = y;
  for (std::size_t i = 0; i < n; ++i)
    r[i] -= kernels::dot(X.row(i), coefficients.data(), d);
  std::vector<double> g(d);
  const double inv_n2 = 2.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += X(i, j) * r[i];
    g[j] = inv_n2 * s;
  }
  return kkt_from_gradients(coefficients, g, lambda);
}

}  // namespace sparsebandit
