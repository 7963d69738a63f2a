#include "sparsebandit/instances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "sparsebandit/kernels.hpp"

namespace sparsebandit {

namespace {

// Binomial coefficient in double precision (exact below 2^53, saturating above).
double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double out = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    out *= static_cast<double>(n - i);
    out /= static_cast<double>(i + 1);
    if (out > 1e18) return 1e18;  // far beyond any enumeration cap
  }
  return out;
}

double pow2_count(std::size_t bits) {
  return bits >= 60 ? 1e18 : static_cast<double>(std::uint64_t{1} << bits);
}

// Lexicographically next k-combination of {0..m-1}; false when exhausted.
bool next_combination(std::vector<std::size_t>& c, std::size_t m) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] + (k - i) < m) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Decode the rank-th combination (lexicographic order) of k items from {0..m-1}.
std::vector<std::size_t> unrank_combination(double rank, std::size_t m, std::size_t k) {
  std::vector<std::size_t> combo(k);
  std::size_t next = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t v = next;; ++v) {
      const double block = binomial(m - v - 1, k - i - 1);
      if (rank < block) {
        combo[i] = v;
        next = v + 1;
        break;
      }
      rank -= block;
    }
  }
  return combo;
}

std::vector<double> low_regret_coords(const std::vector<std::size_t>& combo,
                                      std::uint64_t sign_mask, std::size_t d) {
  std::vector<double> x(d, 0.0);
  for (std::size_t p = 0; p < combo.size(); ++p)
    x[combo[p]] = ((sign_mask >> p) & 1U) ? -1.0 : 1.0;
  return x;
}

std::vector<double> theta_for(const HardInstanceSpec& spec) {
  std::vector<double> theta(spec.d, 0.0);
  for (std::size_t j = 0; j + 1 < spec.s; ++j) theta[j] = spec.epsilon;
  theta[spec.d - 1] = -1.0;
  return theta;
}

std::string coord_key(const std::vector<double>& x) {
  std::string key;
  key.reserve(x.size() * sizeof(double));
  for (double v : x) {
    const char* p = reinterpret_cast<const char*>(&v);
    key.append(p, sizeof(double));
  }
  return key;
}

// k distinct indices drawn uniformly from {0..n-1} via a sparse Fisher-Yates
// (only touched positions are stored).
std::vector<std::uint64_t> sample_indices(std::uint64_t n, std::size_t k, RngStream& rng) {
  std::unordered_map<std::uint64_t, std::uint64_t> perm;
  std::vector<std::uint64_t> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::uint64_t j = i + rng.uniform_int(n - i);
    auto it_j = perm.find(j);
    const std::uint64_t val_j = it_j == perm.end() ? j : it_j->second;
    auto it_i = perm.find(i);
    perm[j] = it_i == perm.end() ? i : it_i->second;
    out[i] = val_j;
  }
  return out;
}

// s-1 sorted coordinates drawn uniformly from the range [lo, hi).
std::vector<std::size_t> random_combination(std::size_t lo, std::size_t hi,
                                            std::size_t k, RngStream& rng) {
  const auto picks = sample_indices(hi - lo, k, rng);
  std::vector<std::size_t> combo(k);
  for (std::size_t i = 0; i < k; ++i) combo[i] = lo + static_cast<std::size_t>(picks[i]);
  std::sort(combo.begin(), combo.end());
  return combo;
}

}  // namespace

void HardInstanceSpec::validate() const {
  if (d < 3) throw std::invalid_argument("HardInstanceSpec: d must be at least 3");
  if (s < 2 || s > d - 1)
    throw std::invalid_argument("HardInstanceSpec: need 2 <= s <= d-1");
  if (!(kappa > 0.0) || kappa > 1.0)
    throw std::invalid_argument("HardInstanceSpec: kappa must lie in (0, 1]");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("HardInstanceSpec: epsilon must be positive");
  if (enumeration_cap == 0 || candidate_cap == 0)
    throw std::invalid_argument("HardInstanceSpec: caps must be positive");
}

void ContextualSpec::validate() const {
  if (num_arms < 2) throw std::invalid_argument("ContextualSpec: need at least 2 arms");
  if (dim == 0) throw std::invalid_argument("ContextualSpec: dim must be positive");
  if (sparsity == 0 || sparsity > dim)
    throw std::invalid_argument("ContextualSpec: need 1 <= sparsity <= dim");
  if (!(rho >= 0.0) || rho >= 1.0)
    throw std::invalid_argument("ContextualSpec: rho must lie in [0, 1)");
  if (horizon == 0) throw std::invalid_argument("ContextualSpec: horizon must be positive");
}

double default_epsilon(double kappa, std::size_t s, std::size_t n) {
  if (!(kappa > 0.0) || s == 0 || n == 0)
    throw std::invalid_argument("default_epsilon: inputs must be positive");
  return std::pow(kappa, -2.0 / 3.0) * std::pow(static_cast<double>(s), -2.0 / 3.0) *
         std::pow(static_cast<double>(n), -1.0 / 3.0);
}

HardInstance hard_instance(const HardInstanceSpec& spec) {
  spec.validate();
  const std::size_t d = spec.d, s = spec.s;
  const double n_low = binomial(d - 1, s - 1) * pow2_count(s - 1);
  const double n_inf = pow2_count(d - 1);
  if (n_low + n_inf > static_cast<double>(spec.enumeration_cap))
    throw std::invalid_argument(
        "hard_instance: the action set has " + std::to_string(n_low + n_inf) +
        " elements, above the enumeration cap of " +
        std::to_string(spec.enumeration_cap) +
        "; use subsample_hard_instance instead");

  std::vector<Action> actions;
  actions.reserve(static_cast<std::size_t>(n_low + n_inf));

  std::vector<std::size_t> combo(s - 1);
  for (std::size_t i = 0; i + 1 < s; ++i) combo[i] = i;
  do {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (s - 1)); ++mask)
      actions.push_back(Action{low_regret_coords(combo, mask, d)});
  } while (next_combination(combo, d - 1));
  const std::size_t low_count = actions.size();

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (d - 1)); ++mask) {
    std::vector<double> x(d, 0.0);
    for (std::size_t j = 0; j + 1 < d; ++j)
      x[j] = ((mask >> j) & 1U) ? -spec.kappa : spec.kappa;
    x[d - 1] = 1.0;
    actions.push_back(Action{std::move(x)});
  }

  HardInstance out{ActionSet(std::move(actions), d),
                   SparseInstance{theta_for(spec), s, 1.0},
                   {}, {}};
  for (std::size_t i = 0; i < low_count; ++i) out.low_regret.push_back(i);
  for (std::size_t i = low_count; i < out.actions.size(); ++i)
    out.informative.push_back(i);
  return out;
}

HardInstance subsample_hard_instance(const HardInstanceSpec& spec, RngStream& rng) {
  spec.validate();
  const std::size_t d = spec.d, s = spec.s;
  const double n_low = binomial(d - 1, s - 1) * pow2_count(s - 1);
  const double n_inf = pow2_count(d - 1);
  if (spec.n_low_regret == 0)
    throw std::invalid_argument("subsample_hard_instance: n_low_regret must include x*");
  if (static_cast<double>(spec.n_low_regret) > n_low ||
      static_cast<double>(spec.n_informative) > n_inf)
    throw std::invalid_argument(
        "subsample_hard_instance: requested more actions than the block holds");

  std::vector<Action> actions;
  actions.reserve(spec.n_low_regret + spec.n_informative);

  // Low-regret block: x* first, then distinct uniform draws from S \ {x*}.
  std::vector<std::size_t> star(s - 1);
  for (std::size_t i = 0; i + 1 < s; ++i) star[i] = i;
  actions.push_back(Action{low_regret_coords(star, 0, d)});
  const bool enumerable_low = n_low <= 9.0e15;
  if (enumerable_low) {
    // Index c * 2^(s-1) + mask with x* at index 0; shift by one to skip it.
    const auto picks =
        sample_indices(static_cast<std::uint64_t>(n_low) - 1, spec.n_low_regret - 1, rng);
    const std::uint64_t mask_count = std::uint64_t{1} << (s - 1);
    for (std::uint64_t p : picks) {
      const std::uint64_t idx = p + 1;
      const auto combo =
          unrank_combination(static_cast<double>(idx / mask_count), d - 1, s - 1);
      actions.push_back(Action{low_regret_coords(combo, idx % mask_count, d)});
    }
  } else {
    std::unordered_set<std::string> seen;
    seen.insert(coord_key(actions[0].coords));
    while (actions.size() < spec.n_low_regret) {
      const auto combo = random_combination(0, d - 1, s - 1, rng);
      std::uint64_t mask = 0;
      for (std::size_t p = 0; p + 1 < s; ++p) mask |= rng.uniform_int(2) << p;
      auto x = low_regret_coords(combo, mask, d);
      if (seen.insert(coord_key(x)).second) actions.push_back(Action{std::move(x)});
    }
  }
  const std::size_t low_count = actions.size();

  if (d - 1 < 60) {
    const auto picks = sample_indices(std::uint64_t{1} << (d - 1), spec.n_informative, rng);
    for (std::uint64_t mask : picks) {
      std::vector<double> x(d, 0.0);
      for (std::size_t j = 0; j + 1 < d; ++j)
        x[j] = ((mask >> j) & 1U) ? -spec.kappa : spec.kappa;
      x[d - 1] = 1.0;
      actions.push_back(Action{std::move(x)});
    }
  } else {
    std::unordered_set<std::string> seen_inf;
    while (actions.size() < low_count + spec.n_informative) {
      std::vector<double> x(d, 0.0);
      for (std::size_t j = 0; j + 1 < d; ++j)
        x[j] = rng.sign() * spec.kappa;
      x[d - 1] = 1.0;
      if (seen_inf.insert(coord_key(x)).second) actions.push_back(Action{std::move(x)});
    }
  }

  HardInstance out{ActionSet(std::move(actions), d),
                   SparseInstance{theta_for(spec), s, 1.0},
                   {}, {}};
  for (std::size_t i = 0; i < low_count; ++i) out.low_regret.push_back(i);
  for (std::size_t i = low_count; i < out.actions.size(); ++i)
    out.informative.push_back(i);
  return out;
}

std::vector<double> alternative_theta(const std::vector<double>& theta,
                                      const HardInstanceSpec& spec,
                                      const std::vector<Action>& logged_actions,
                                      RngStream& rng) {
  spec.validate();
  const std::size_t d = spec.d, s = spec.s;
  if (theta.size() != d)
    throw std::invalid_argument("alternative_theta: theta has the wrong dimension");
  if (d - 1 < 2 * (s - 1))
    throw std::invalid_argument(
        "alternative_theta: no disjoint support available; need d-1 >= 2(s-1)");
  for (const Action& a : logged_actions)
    if (a.dim() != d)
      throw std::invalid_argument("alternative_theta: logged action dimension mismatch");

  // Candidate supports live on coordinates s-1..d-2 (disjoint from theta's).
  const std::size_t lo = s - 1, hi = d - 1;
  const std::size_t T = logged_actions.size();

  // Column-major copy of the logged actions restricted to nothing (we pull the
  // needed columns on demand); columns let the objective use fused kernels.
  std::vector<std::vector<double>> cols(hi - lo, std::vector<double>(T));
  for (std::size_t c = lo; c < hi; ++c)
    for (std::size_t t = 0; t < T; ++t) cols[c - lo][t] = logged_actions[t].coords[c];

  std::vector<double> acc(T);
  const auto objective = [&](const std::vector<std::size_t>& combo,
                             std::uint64_t mask) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < combo.size(); ++p) {
      const double sgn = ((mask >> p) & 1U) ? -1.0 : 1.0;
      kernels::axpy(sgn, cols[combo[p] - lo].data(), acc.data(), T);
    }
    return kernels::sumsq(acc.data(), T);
  };

  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  const auto consider = [&](const std::vector<std::size_t>& combo, std::uint64_t mask) {
    const double obj = objective(combo, mask);
    if (obj < best_obj) {
      best_obj = obj;
      best_x = low_regret_coords(combo, mask, d);
    } else if (obj == best_obj) {
      auto x = low_regret_coords(combo, mask, d);
      if (x < best_x) best_x = std::move(x);
    }
  };

  const double family = binomial(hi - lo, s - 1) * pow2_count(s - 1);
  if (family <= static_cast<double>(spec.candidate_cap)) {
    std::vector<std::size_t> shifted(s - 1);
    for (std::size_t i = 0; i + 1 < s; ++i) shifted[i] = i;
    std::vector<std::size_t> combo(s - 1);
    do {
      for (std::size_t i = 0; i + 1 < s; ++i) combo[i] = shifted[i] + lo;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (s - 1)); ++mask)
        consider(combo, mask);
    } while (next_combination(shifted, hi - lo));
  } else {
    for (std::size_t k = 0; k < spec.candidate_cap; ++k) {
      const auto combo = random_combination(lo, hi, s - 1, rng);
      std::uint64_t mask = 0;
      for (std::size_t p = 0; p + 1 < s; ++p) mask |= rng.uniform_int(2) << p;
      consider(combo, mask);
    }
  }

  std::vector<double> tilt = theta;
  for (std::size_t j = 0; j < d; ++j) tilt[j] += 2.0 * spec.epsilon * best_x[j];
  return tilt;
}

double kl_between(const std::vector<double>& theta,
                  const std::vector<double>& theta_tilde,
                  const ActionSet& actions,
                  const std::vector<double>& pull_counts,
                  double noise_std) {
  if (theta.size() != actions.dim() || theta_tilde.size() != actions.dim())
    throw std::invalid_argument("kl_between: parameter dimension mismatch");
  if (pull_counts.size() != actions.size())
    throw std::invalid_argument("kl_between: one pull count per action required");
  if (!(noise_std > 0.0))
    throw std::invalid_argument("kl_between: noise_std must be positive");
  std::vector<double> diff(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) diff[j] = theta[j] - theta_tilde[j];
  double total = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (pull_counts[i] < 0.0)
      throw std::invalid_argument("kl_between: pull counts must be non-negative");
    const double proj = actions[i].dot(diff);
    total += pull_counts[i] * proj * proj;
  }
  return total / (2.0 * noise_std * noise_std);
}

ContextualInstance contextual_instance(const ContextualSpec& spec, RngStream& rng) {
  spec.validate();
  const std::size_t N = spec.num_arms, d = spec.dim;

  std::vector<double> theta(d, 0.0);
  const auto support = sample_indices(d, spec.sparsity, rng);
  for (std::uint64_t j : support) theta[j] = rng.sign();

  const double shared_w = spec.rho;
  const double own_w = std::sqrt(1.0 - spec.rho * spec.rho);
  ContextualInstance out;
  out.instance = SparseInstance{std::move(theta), spec.sparsity, 1.0};
  out.rounds.reserve(spec.horizon);
  for (std::size_t t = 0; t < spec.horizon; ++t) {
    // Clipping can make two arms coincide exactly (likely only at tiny d);
    // action sets are duplicate-free, so such rounds are redrawn.
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 1000)
        throw std::runtime_error(
            "contextual_instance: could not draw a duplicate-free round; "
            "the configuration collapses arms onto the clip boundary");
      std::vector<Action> arms(N);
      for (auto& a : arms) a.coords.assign(d, 0.0);
      for (std::size_t c = 0; c < d; ++c) {
        const double shared = rng.normal();
        for (std::size_t i = 0; i < N; ++i) {
          const double v = shared_w * shared + own_w * rng.normal();
          arms[i].coords[c] = std::clamp(v, -1.0, 1.0);
        }
      }
      std::unordered_set<std::string> keys;
      bool distinct = true;
      for (const auto& a : arms)
        if (!keys.insert(coord_key(a.coords)).second) {
          distinct = false;
          break;
        }
      if (distinct) {
        out.rounds.emplace_back(std::move(arms), d);
        break;
      }
    }
  }
  return out;
}

Mat contextual_raw_features(const ContextualSpec& spec, std::size_t num_draws,
                            RngStream& rng) {
  spec.validate();
  const double shared_w = spec.rho;
  const double own_w = std::sqrt(1.0 - spec.rho * spec.rho);
  Mat out(num_draws, spec.num_arms);
  for (std::size_t t = 0; t < num_draws; ++t) {
    const double shared = rng.normal();
    for (std::size_t i = 0; i < spec.num_arms; ++i)
      out(t, i) = shared_w * shared + own_w * rng.normal();
  }
  return out;
}

double lower_bound(std::size_t n, std::size_t d, std::size_t s, double c_min) {
  if (n == 0 || d == 0 || s == 0 || !(c_min > 0.0))
    throw std::invalid_argument("lower_bound: inputs must be positive");
  const double nn = static_cast<double>(n);
  const double poor = std::pow(c_min, -1.0 / 3.0) *
                      std::pow(static_cast<double>(s), 1.0 / 3.0) * std::pow(nn, 2.0 / 3.0);
  const double rich = std::sqrt(static_cast<double>(d) * nn);
  return std::exp(-4.0) / 4.0 * std::min(poor, rich);
}

double estc_upper_bound(std::size_t n, std::size_t d, std::size_t s, double r_max,
                        double c_min, std::size_t n1, double c1) {
  if (n == 0 || d == 0 || s == 0 || !(r_max > 0.0) || !(c_min > 0.0))
    throw std::invalid_argument("estc_upper_bound: inputs must be positive");
  const double nn = static_cast<double>(n);
  const double main_term =
      std::cbrt(2.0 * std::log(2.0 * static_cast<double>(d)) * r_max) *
      std::pow(c_min, -2.0 / 3.0) * std::pow(static_cast<double>(s), 2.0 / 3.0) *
      std::pow(nn, 2.0 / 3.0);
  return main_term + 3.0 * nn * r_max * std::exp(-c1 * static_cast<double>(n1));
}

double rpe_upper_bound(std::size_t n, std::size_t d, std::size_t s, double m,
                       double c_min, double phi_max, std::size_t num_actions,
                       double scale) {
  if (n == 0 || d == 0 || s == 0 || num_actions == 0 || !(m > 0.0) ||
      !(c_min > 0.0) || !(phi_max > 0.0) || !(scale > 0.0))
    throw std::invalid_argument("rpe_upper_bound: inputs must be positive");
  const double nn = static_cast<double>(n);
  const double id_term =
      static_cast<double>(s) * std::log(static_cast<double>(d)) / (m * m * c_min);
  const double tail_term =
      std::sqrt(9.0 * phi_max * std::log(static_cast<double>(num_actions) * nn) / c_min) *
      std::sqrt(static_cast<double>(s) * nn);
  return scale * (id_term + tail_term);
}

}  // namespace sparsebandit
