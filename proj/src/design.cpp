#include "sparsebandit/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sparsebandit/kernels.hpp"

namespace sparsebandit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Golden-section maximization of a unimodal-ish f on [lo, hi]; returns
// (argmax, max).  Also probes the endpoints so a boundary optimum is never
// missed even if f is not strictly unimodal.
template <typename F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iters) {
  const double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  double best_x = (f1 >= f2) ? x1 : x2;
  double best_f = std::max(f1, f2);
  for (double e : {lo, hi}) {
    const double fe = f(e);
    if (fe > best_f) {
      best_f = fe;
      best_x = e;
    }
  }
  return {best_x, best_f};
}

// Greedy pivoted selection of up to d actions spanning R^d (modified
// Gram-Schmidt on the action vectors, largest residual first).
std::vector<std::size_t> pivoted_spanning_subset(const ActionSet& actions) {
  const std::size_t K = actions.size(), d = actions.dim();
  std::vector<std::vector<double>> resid(K);
  for (std::size_t i = 0; i < K; ++i) resid[i] = actions[i].coords;
  double max0 = 0.0;
  for (std::size_t i = 0; i < K; ++i)
    max0 = std::max(max0, kernels::sumsq(resid[i].data(), d));
  const double cut = std::max(1e-20 * max0, 1e-300);

  std::vector<std::size_t> chosen;
  std::vector<char> used(K, 0);
  for (std::size_t step = 0; step < d; ++step) {
    std::size_t best = K;
    double best_norm = cut;
    for (std::size_t i = 0; i < K; ++i) {
      if (used[i]) continue;
      const double nrm = kernels::sumsq(resid[i].data(), d);
      if (nrm > best_norm) {
        best_norm = nrm;
        best = i;
      }
    }
    if (best == K) break;
    used[best] = 1;
    chosen.push_back(best);
    const double inv = 1.0 / std::sqrt(best_norm);
    std::vector<double> q = resid[best];
    for (auto& v : q) v *= inv;
    for (std::size_t i = 0; i < K; ++i) {
      if (used[i]) continue;
      const double proj = kernels::dot(q.data(), resid[i].data(), d);
      kernels::axpy(-proj, q.data(), resid[i].data(), d);
    }
  }
  return chosen;
}

void add_outer(Mat& S, const double* x, double wgt) {
  const std::size_t d = S.rows;
  for (std::size_t i = 0; i < d; ++i) {
    const double wi = wgt * x[i];
    if (wi == 0.0) continue;
    kernels::axpy(wi, x, S.row(i), d);
  }
}

Mat covariance_of_weights(const std::vector<double>& w, const ActionSet& actions) {
  const std::size_t d = actions.dim();
  Mat S(d, d, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) add_outer(S, actions[i].coords.data(), w[i]);
  return S;
}

DesignDistribution distribution_from_weights(const std::vector<double>& w,
                                             std::size_t dim) {
  DesignDistribution out;
  out.dim = dim;
  double total = 0.0;
  for (double v : w) total += std::max(v, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 1e-14 * total) out.atoms.emplace_back(i, w[i]);
  double kept = 0.0;
  for (auto& [idx, wt] : out.atoms) kept += wt;
  for (auto& [idx, wt] : out.atoms) wt /= kept;
  return out;
}

// Dual witnesses for an upper bound on C_min: any PSD W with trace 1 gives
// C_min <= max_x x^T W x.  Averaging the projectors onto the k smallest
// eigendirections of the current covariance (k = 1 recovers the plain
// Frank-Wolfe gap witness) gives a family of cheap bounds; the scan prunes
// once the mean of the first k eigenvalues already exceeds the best bound.
double cluster_upper_bound(const EighResult& eig, const ActionSet& actions,
                           double prune_above) {
  const std::size_t d = eig.values.size(), K = actions.size();
  std::vector<double> run(K, 0.0), col(d);
  double best = kInf;
  double lam_sum = 0.0;
  for (std::size_t k = 1; k <= d; ++k) {
    for (std::size_t i = 0; i < d; ++i) col[i] = eig.vectors(i, k - 1);
    double max_run = 0.0;
    for (std::size_t x = 0; x < K; ++x) {
      const double p = kernels::dot(actions[x].coords.data(), col.data(), d);
      run[x] += p * p;
      max_run = std::max(max_run, run[x]);
    }
    best = std::min(best, max_run / static_cast<double>(k));
    lam_sum += eig.values[k - 1];
    const double lam_mean = lam_sum / static_cast<double>(k);
    if (lam_mean >= std::min(best, prune_above)) break;
  }
  return best;
}

}  // namespace

Mat covariance(const DesignDistribution& design, const ActionSet& actions) {
  if (design.dim != actions.dim())
    throw std::invalid_argument("covariance: dimension mismatch");
  double total = 0.0;
  for (const auto& [idx, w] : design.atoms) {
    if (idx >= actions.size())
      throw std::invalid_argument("covariance: atom index out of range");
    if (w < -1e-15) throw std::invalid_argument("covariance: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::invalid_argument("covariance: weights must sum to 1");
  const std::size_t d = actions.dim();
  Mat S(d, d, 0.0);
  for (const auto& [idx, w] : design.atoms)
    if (w > 0.0) add_outer(S, actions[idx].coords.data(), w);
  return S;
}

std::pair<double, std::vector<double>> min_eigen(const Mat& matrix) {
  if (matrix.rows != matrix.cols)
    throw std::invalid_argument("min_eigen: matrix must be square");
  const std::size_t d = matrix.rows;
  double scale = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      scale = std::max(scale, std::fabs(matrix(i, j)));
      asym = std::max(asym, std::fabs(matrix(i, j) - matrix(j, i)));
    }
  if (asym > 1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("min_eigen: matrix must be symmetric");
  const EighResult e = eigh(matrix);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = e.vectors(i, 0);
  return {e.values[0], v};
}

std::pair<DesignDistribution, DesignCertificate> solve_e_optimal(
    const ActionSet& actions, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_e_optimal: tol must be > 0");
  const std::size_t K = actions.size(), d = actions.dim();

  const auto span = pivoted_spanning_subset(actions);
  if (span.size() < d)
    throw std::invalid_argument(
        "solve_e_optimal: action set does not span the ambient space, so the "
        "design covariance is always singular (C_min = 0)");

  // Incumbent mixture: uniform on the spanning subset.
  std::vector<double> w(K, 0.0);
  for (std::size_t idx : span) w[idx] = 1.0 / static_cast<double>(d);
  Mat Sigma = covariance_of_weights(w, actions);

  double best_ub = kInf;
  std::vector<std::vector<double>> cuts;       // unit vectors
  std::vector<std::vector<double>> cut_vals;   // per cut: (v^T x)^2 for all x
  const std::size_t cut_cap = std::max<std::size_t>(2 * d + 16, 72);

  auto add_cut = [&](const std::vector<double>& v) {
    for (const auto& c : cuts)
      if (std::fabs(kernels::dot(c.data(), v.data(), d)) > 1.0 - 1e-10) return;
    std::vector<double> vals(K);
    for (std::size_t x = 0; x < K; ++x) {
      const double p = kernels::dot(actions[x].coords.data(), v.data(), d);
      vals[x] = p * p;
    }
    cuts.push_back(v);
    cut_vals.push_back(std::move(vals));
  };

  bool kelley = false;
  int stall = 0;
  int lp_failures = 0;
  std::size_t it = 0;
  double sigma_min = 0.0;

  for (; it < max_iter; ++it) {
    const EighResult eig = eigh(Sigma);
    sigma_min = eig.values[0];
    best_ub = std::min(best_ub, cluster_upper_bound(eig, actions, best_ub));
    if (best_ub - sigma_min <= tol) break;

    std::vector<double> vmin(d);
    for (std::size_t i = 0; i < d; ++i) vmin[i] = eig.vectors(i, 0);

    // Frank-Wolfe step: pick the atom maximizing the supergradient, then take
    // an exact line search along the rank-one slice (the secular equation
    // makes each probe O(d)).  Returns the objective improvement.
    auto fw_step = [&]() {
      std::size_t x_plus = 0;
      double best_val = -1.0;
      for (std::size_t x = 0; x < K; ++x) {
        const double p = kernels::dot(actions[x].coords.data(), vmin.data(), d);
        if (p * p > best_val) {
          best_val = p * p;
          x_plus = x;
        }
      }
      std::vector<double> u(d);
      for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
          s += eig.vectors(i, j) * actions[x_plus].coords[i];
        u[j] = s;
      }
      std::vector<double> scaled(d);
      auto slice = [&](double g) {
        for (std::size_t j = 0; j < d; ++j) scaled[j] = (1.0 - g) * eig.values[j];
        return rank_one_min_eigenvalue(scaled, u, g);
      };
      auto [gamma, val] = golden_max(slice, 0.0, 1.0, 44);
      const double g_fb = 2.0 / static_cast<double>(it + 2);  // fallback step
      const double val_fb = slice(g_fb);
      if (val_fb > val) {
        val = val_fb;
        gamma = g_fb;
      }
      const double improvement = val - sigma_min;
      if (improvement <= 0.0) return 0.0;
      for (auto& wi : w) wi *= (1.0 - gamma);
      w[x_plus] += gamma;
      for (auto& s : Sigma.a) s *= (1.0 - gamma);
      add_outer(Sigma, actions[x_plus].coords.data(), gamma);
      return improvement;
    };

    if (!kelley) {
      const double improvement = fw_step();
      // A step that closes less than a millionth of the remaining gap means
      // the single-eigenvector supergradient has degenerated (repeated
      // minimum eigenvalue); hand over to the cutting-plane phase.
      if (improvement <= 1e-6 * std::max(best_ub - sigma_min, tol)) {
        if (++stall >= 3) {
          kelley = true;
          add_cut(vmin);
        }
      } else {
        stall = 0;
      }
      continue;
    }

    // Cutting-plane refinement.
    add_cut(vmin);

    // Master LP over (mu, t):  max t  s.t.  sum mu = 1,
    //                                       t - sum_x (v_c^T x)^2 mu_x <= 0.
    const std::size_t C = cuts.size();
    Mat A(C + 1, K + 1, 0.0);
    std::vector<double> b(C + 1, 0.0);
    std::string rel;
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t x = 0; x < K; ++x) A(c, x) = -cut_vals[c][x];
      A(c, K) = 1.0;
      rel += '<';
    }
    for (std::size_t x = 0; x < K; ++x) A(C, x) = 1.0;
    b[C] = 1.0;
    rel += '=';
    std::vector<double> cost(K + 1, 0.0);
    cost[K] = -1.0;
    const LpResult lp = solve_lp(A, b, cost, rel);
    if (lp.status != LpStatus::Optimal) {
      if (++lp_failures >= 10)
        throw std::runtime_error("solve_e_optimal: master LP failed repeatedly");
      fw_step();  // degrade gracefully for this round
      continue;
    }
    lp_failures = 0;
    const double t_star = lp.x[K];
    best_ub = std::min(best_ub, t_star);  // model majorizes sigma_min everywhere
    if (best_ub - sigma_min <= tol) break;

    std::vector<double> mu_lp(lp.x.begin(), lp.x.begin() + K);
    const Mat Sigma_lp = covariance_of_weights(mu_lp, actions);

    // Stabilization: line search between the incumbent and the LP solution;
    // the pure LP point is also a candidate.
    Mat mix(d, d);
    auto blend = [&](double g) {
      for (std::size_t i = 0; i < d * d; ++i)
        mix.a[i] = (1.0 - g) * Sigma.a[i] + g * Sigma_lp.a[i];
      return smallest_eigenvalue(mix);
    };
    auto [gamma, val] = golden_max(blend, 0.0, 1.0, 28);

    bool accepted = false;
    if (val > sigma_min + 1e-14 * (1.0 + std::fabs(sigma_min)) && gamma > 0.0) {
      for (std::size_t x = 0; x < K; ++x)
        w[x] = (1.0 - gamma) * w[x] + gamma * mu_lp[x];
      for (std::size_t i = 0; i < d * d; ++i)
        Sigma.a[i] = (1.0 - gamma) * Sigma.a[i] + gamma * Sigma_lp.a[i];
      accepted = true;
    }
    // Cut at the LP point keeps the master honest whether or not we moved.
    const EighResult elp = eigh(Sigma_lp);
    std::vector<double> vlp(d);
    for (std::size_t i = 0; i < d; ++i) vlp[i] = elp.vectors(i, 0);
    add_cut(vlp);
    (void)accepted;

    // Bundle compression: drop the loosest cuts at the current LP solution.
    if (cuts.size() > cut_cap) {
      std::vector<double> slack(cuts.size());
      for (std::size_t c = 0; c < cuts.size(); ++c) {
        double g_mu = 0.0;
        for (std::size_t x = 0; x < K; ++x)
          if (mu_lp[x] > 0.0) g_mu += cut_vals[c][x] * mu_lp[x];
        slack[c] = g_mu - t_star;
      }
      std::vector<std::size_t> order(cuts.size());
      for (std::size_t c = 0; c < order.size(); ++c) order[c] = c;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a2, std::size_t b2) { return slack[a2] < slack[b2]; });
      const std::size_t keep = (3 * cut_cap) / 4;
      std::vector<std::vector<double>> new_cuts, new_vals;
      for (std::size_t c = 0; c < keep; ++c) {
        new_cuts.push_back(std::move(cuts[order[c]]));
        new_vals.push_back(std::move(cut_vals[order[c]]));
      }
      cuts = std::move(new_cuts);
      cut_vals = std::move(new_vals);
    }
  }

  DesignDistribution dist = distribution_from_weights(w, d);
  const Mat Sfinal = covariance(dist, actions);
  const EighResult efinal = eigh(Sfinal);
  const double obj = efinal.values[0];
  if (!(best_ub < kInf))  // max_iter == 0: certify from the final point alone
    best_ub = cluster_upper_bound(efinal, actions, kInf);
  DesignCertificate cert;
  cert.objective = obj;
  cert.fw_gap = std::max(0.0, best_ub - obj);
  cert.iterations = it;
  return {std::move(dist), cert};
}

double c_min(const ActionSet& actions, double tol) {
  return solve_e_optimal(actions, tol).second.objective;
}

std::pair<DesignDistribution, DesignCertificate> solve_g_optimal(
    const ActionSet& actions, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_g_optimal: tol must be > 0");
  const std::size_t K = actions.size(), d = actions.dim();
  const auto span = pivoted_spanning_subset(actions);
  if (span.size() < d)
    throw std::invalid_argument(
        "solve_g_optimal: action set does not span the ambient space");

  std::vector<double> w(K, 0.0);
  for (std::size_t idx : span) w[idx] = 1.0 / static_cast<double>(d);
  Mat V = covariance_of_weights(w, actions);

  auto leverages = [&](std::vector<double>& lev) {
    Mat L = V;
    if (cholesky(L)) {
      // lev_x = ||L^{-1} x||^2 via one forward solve per action.
      std::vector<double> y(d);
      for (std::size_t x = 0; x < K; ++x) {
        const double* xc = actions[x].coords.data();
        for (std::size_t i = 0; i < d; ++i)
          y[i] = (xc[i] - kernels::dot(L.row(i), y.data(), i)) / L(i, i);
        lev[x] = kernels::sumsq(y.data(), d);
      }
      return;
    }
    // Defensive fallback; the iteration keeps V positive definite, so this
    // only fires on pathological conditioning.
    for (std::size_t x = 0; x < K; ++x) {
      const auto sol = solve_spd(V, actions[x].coords);
      lev[x] = kernels::dot(actions[x].coords.data(), sol.x.data(), d);
    }
  };

  std::vector<double> lev(K);
  double lmax = 0.0;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    leverages(lev);
    std::size_t x_plus = 0;
    lmax = -kInf;
    for (std::size_t x = 0; x < K; ++x)
      if (lev[x] > lmax) {
        lmax = lev[x];
        x_plus = x;
      }
    if (lmax <= (1.0 + tol) * static_cast<double>(d)) break;
    // Closed-form Kiefer-Wolfowitz step.
    const double gamma = (lmax / static_cast<double>(d) - 1.0) / (lmax - 1.0);
    if (!(gamma > 0.0) || !(gamma < 1.0)) break;
    for (auto& wi : w) wi *= (1.0 - gamma);
    w[x_plus] += gamma;
    for (auto& s : V.a) s *= (1.0 - gamma);
    add_outer(V, actions[x_plus].coords.data(), gamma);
  }

  DesignDistribution dist = distribution_from_weights(w, d);
  V = covariance(dist, actions);
  leverages(lev);
  lmax = *std::max_element(lev.begin(), lev.end());
  DesignCertificate cert;
  cert.objective = lmax;
  cert.fw_gap = std::max(0.0, lmax - static_cast<double>(d));
  cert.iterations = it;
  return {std::move(dist), cert};
}

}  // namespace sparsebandit
