#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "sparsebandit/design.hpp"
#include "sparsebandit/kernels.hpp"
#include "sparsebandit/linalg.hpp"
#include "sparsebandit/model.hpp"
#include "sparsebandit/rng.hpp"

using namespace sparsebandit;

namespace {

ActionSet basis_actions(std::size_t d) {
  std::vector<Action> acts;
  for (std::size_t i = 0; i < d; ++i) {
    Action a;
    a.coords.assign(d, 0.0);
    a.coords[i] = 1.0;
    acts.push_back(std::move(a));
  }
  return ActionSet(std::move(acts), d);
}

ActionSet hypercube_corners(std::size_t d) {
  std::vector<Action> acts;
  for (std::size_t mask = 0; mask < (1u << d); ++mask) {
    Action a;
    a.coords.resize(d);
    for (std::size_t j = 0; j < d; ++j)
      a.coords[j] = (mask >> j) & 1 ? 1.0 : -1.0;
    acts.push_back(std::move(a));
  }
  return ActionSet(std::move(acts), d);
}

// Two-block action set: sparse sign vectors on the first d-1 coordinates
// (exactly s-1 nonzeros) plus the informative slab {-k, k}^{d-1} x {1}.
ActionSet two_block_set(std::size_t d, std::size_t s, double kappa) {
  std::vector<Action> acts;
  const std::size_t m = d - 1;
  std::vector<std::size_t> comb(s - 1);
  // enumerate supports of size s-1 over the first m coordinates
  for (std::size_t i = 0; i < s - 1; ++i) comb[i] = i;
  for (;;) {
    const std::size_t signs = 1u << (s - 1);
    for (std::size_t sm = 0; sm < signs; ++sm) {
      Action a;
      a.coords.assign(d, 0.0);
      for (std::size_t i = 0; i < s - 1; ++i)
        a.coords[comb[i]] = (sm >> i) & 1 ? -1.0 : 1.0;
      acts.push_back(std::move(a));
    }
    std::size_t i = s - 1;
    while (i > 0 && comb[i - 1] == m - (s - 1) + (i - 1)) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < s - 1; ++j) comb[j] = comb[j - 1] + 1;
  }
  for (std::size_t mask = 0; mask < (1u << m); ++mask) {
    Action a;
    a.coords.resize(d);
    for (std::size_t j = 0; j < m; ++j)
      a.coords[j] = ((mask >> j) & 1 ? 1.0 : -1.0) * kappa;
    a.coords[m] = 1.0;
    acts.push_back(std::move(a));
  }
  return ActionSet(std::move(acts), d);
}

double sigma_min_of(const DesignDistribution& mu, const ActionSet& acts) {
  return eigh(covariance(mu, acts)).values[0];
}

}  // namespace

TEST_CASE("covariance: closed forms") {
  SUBCASE("uniform over the standard basis is I/d") {
    const std::size_t d = 4;
    const auto acts = basis_actions(d);
    DesignDistribution mu;
    mu.dim = d;
    for (std::size_t i = 0; i < d; ++i) mu.atoms.emplace_back(i, 1.0 / d);
    const Mat S = covariance(mu, acts);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        CHECK(S(i, j) == doctest::Approx(i == j ? 0.25 : 0.0).epsilon(1e-14));
  }
  SUBCASE("uniform over the corners of {-1,1}^2 is the identity") {
    const auto acts = hypercube_corners(2);
    DesignDistribution mu;
    mu.dim = 2;
    for (std::size_t i = 0; i < 4; ++i) mu.atoms.emplace_back(i, 0.25);
    const Mat S = covariance(mu, acts);
    CHECK(S(0, 0) == doctest::Approx(1.0));
    CHECK(S(1, 1) == doctest::Approx(1.0));
    CHECK(S(0, 1) == doctest::Approx(0.0));
    CHECK(S(1, 0) == doctest::Approx(0.0));
  }
  SUBCASE("point mass on (0.5) in d=1") {
    const ActionSet acts({Action{{0.5}}}, 1);
    DesignDistribution mu;
    mu.dim = 1;
    mu.atoms.emplace_back(0, 1.0);
    const Mat S = covariance(mu, acts);
    CHECK(S(0, 0) == doctest::Approx(0.25));
  }
}

TEST_CASE("covariance: validation and PSD invariant") {
  const auto acts = basis_actions(3);
  DesignDistribution bad;
  bad.dim = 3;
  bad.atoms = {{5, 1.0}};
  CHECK_THROWS_AS(covariance(bad, acts), std::invalid_argument);
  bad.atoms = {{0, 0.7}, {1, 0.7}};  // sums to 1.4
  CHECK_THROWS_AS(covariance(bad, acts), std::invalid_argument);
  bad.atoms = {{0, 1.5}, {1, -0.5}};  // negative weight
  CHECK_THROWS_AS(covariance(bad, acts), std::invalid_argument);
  bad.dim = 2;
  bad.atoms = {{0, 1.0}};
  CHECK_THROWS_AS(covariance(bad, acts), std::invalid_argument);

  // Random valid designs on a random action set stay PSD.
  RngStream rng(5, 5);
  std::vector<Action> racts;
  for (int i = 0; i < 12; ++i) {
    Action a;
    for (int j = 0; j < 5; ++j) a.coords.push_back(rng.uniform(-1.0, 1.0));
    racts.push_back(std::move(a));
  }
  const ActionSet rset(std::move(racts), 5);
  for (int trial = 0; trial < 20; ++trial) {
    DesignDistribution mu;
    mu.dim = 5;
    double total = 0.0;
    std::vector<double> wts(12);
    for (auto& w : wts) {
      w = rng.uniform(0.0, 1.0);
      total += w;
    }
    for (std::size_t i = 0; i < 12; ++i) mu.atoms.emplace_back(i, wts[i] / total);
    const auto ev = eigh(covariance(mu, rset)).values;
    for (double v : ev) CHECK(v >= -1e-10);
  }
}

TEST_CASE("min_eigen: closed forms and symmetry guard") {
  SUBCASE("identity") {
    const auto [val, vec] = min_eigen(Mat::identity(4));
    CHECK(val == doctest::Approx(1.0));
    CHECK(kernels::sumsq(vec.data(), vec.size()) == doctest::Approx(1.0));
  }
  SUBCASE("diagonal with repeated minimum") {
    const std::size_t d = 5;
    Mat D(d, d, 0.0);
    for (std::size_t i = 0; i + 1 < d; ++i) D(i, i) = 0.25;
    D(d - 1, d - 1) = 1.0;
    const auto [val, vec] = min_eigen(D);
    CHECK(val == doctest::Approx(0.25));
    CHECK(std::fabs(vec[d - 1]) < 1e-8);  // vector lives in the first block
  }
  SUBCASE("2x2 hand decomposition") {
    Mat A(2, 2);
    A(0, 0) = 2.0; A(0, 1) = 1.0; A(1, 0) = 1.0; A(1, 1) = 2.0;
    const auto [val, vec] = min_eigen(A);
    CHECK(val == doctest::Approx(1.0));
    CHECK(std::fabs(vec[0]) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(vec[0] * vec[1] < 0.0);
  }
  SUBCASE("residual bound") {
    RngStream rng(3, 3);
    Mat A(6, 6);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = i; j < 6; ++j) A(i, j) = A(j, i) = rng.normal();
    const auto [val, vec] = min_eigen(A);
    double norm_a = 0.0, resid = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      double av = 0.0;
      for (std::size_t j = 0; j < 6; ++j) {
        av += A(i, j) * vec[j];
        norm_a = std::max(norm_a, std::fabs(A(i, j)));
      }
      resid = std::max(resid, std::fabs(av - val * vec[i]));
    }
    CHECK(resid <= 1e-8 * norm_a * 6);
  }
  SUBCASE("asymmetric input rejected") {
    Mat A(2, 2, 0.0);
    A(0, 1) = 1.0;  // A(1,0) stays 0
    CHECK_THROWS_AS(min_eigen(A), std::invalid_argument);
    CHECK_THROWS_AS(min_eigen(Mat(2, 3, 0.0)), std::invalid_argument);
  }
}

TEST_CASE("solve_e_optimal: standard basis gives 1/d with uniform weights") {
  for (std::size_t d : {2, 5, 20}) {
    const auto acts = basis_actions(d);
    const auto [mu, cert] = solve_e_optimal(acts, 1e-3);
    CAPTURE(d);
    CHECK(cert.objective == doctest::Approx(1.0 / d).epsilon(2e-3));
    CHECK(cert.fw_gap <= 1e-3);
    // Certificate upper-bounds the true optimum 1/d.
    CHECK(cert.objective + cert.fw_gap >= 1.0 / d - 1e-12);
    // Weight sanity: valid distribution, near-uniform.
    double total = 0.0;
    for (const auto& [idx, w] : mu.atoms) {
      CHECK(idx < acts.size());
      CHECK(w >= 0.0);
      total += w;
      CHECK(w == doctest::Approx(1.0 / d).epsilon(0.2));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("solve_e_optimal: hypercube corners give 1") {
  for (std::size_t d : {2, 3, 4, 5, 6}) {
    const auto acts = hypercube_corners(d);
    const auto [mu, cert] = solve_e_optimal(acts, 1e-3);
    CAPTURE(d);
    CHECK(cert.objective >= 1.0 - 1e-3);
    CHECK(cert.objective <= 1.0 + 1e-9);  // sigma_min <= mean eigenvalue = 1
    CHECK(cert.fw_gap <= 1e-3);
  }
}

TEST_CASE("solve_e_optimal: two-block set reaches at least kappa^2") {
  for (double kappa : {0.5, 1.0}) {
    const auto acts = two_block_set(6, 3, kappa);
    const auto [mu, cert] = solve_e_optimal(acts, 1e-3);
    CAPTURE(kappa);
    CHECK(cert.objective >= kappa * kappa - 1e-3);
    CHECK(cert.fw_gap <= 1e-3);
    CHECK(sigma_min_of(mu, acts) == doctest::Approx(cert.objective).epsilon(1e-10));
  }
}

TEST_CASE("solve_e_optimal: certificate dominates 100 random designs") {
  RngStream rng(77, 1);
  std::vector<Action> racts;
  for (int i = 0; i < 15; ++i) {
    Action a;
    for (int j = 0; j < 4; ++j) a.coords.push_back(rng.uniform(-1.0, 1.0));
    racts.push_back(std::move(a));
  }
  const ActionSet acts(std::move(racts), 4);
  const auto [mu, cert] = solve_e_optimal(acts, 1e-3);
  CHECK(cert.fw_gap <= 1e-3);
  for (int trial = 0; trial < 100; ++trial) {
    DesignDistribution nu;
    nu.dim = 4;
    double total = 0.0;
    std::vector<double> wts(acts.size());
    for (auto& w : wts) {
      w = rng.uniform(0.0, 1.0);
      total += w;
    }
    for (std::size_t i = 0; i < acts.size(); ++i)
      nu.atoms.emplace_back(i, wts[i] / total);
    CHECK(sigma_min_of(nu, acts) <= cert.objective + cert.fw_gap + 1e-9);
  }
}

TEST_CASE("solve_e_optimal: error cases") {
  // Two actions cannot span R^3.
  std::vector<Action> acts;
  acts.push_back(Action{{1.0, 0.0, 0.0}});
  acts.push_back(Action{{0.0, 1.0, 0.0}});
  const ActionSet aset(std::move(acts), 3);
  CHECK_THROWS_WITH_AS(solve_e_optimal(aset),
                       doctest::Contains("C_min = 0"), std::invalid_argument);
  CHECK_THROWS_AS(solve_e_optimal(basis_actions(2), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_e_optimal(basis_actions(2), -1.0), std::invalid_argument);
}

TEST_CASE("c_min wrapper") {
  CHECK(c_min(basis_actions(4), 1e-3) == doctest::Approx(0.25).epsilon(2e-3));
  CHECK(c_min(hypercube_corners(3), 1e-3) == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("solve_e_optimal on a large basis terminates immediately") {
  const auto [mu, cert] = solve_e_optimal(basis_actions(100), 1e-3);
  CHECK(cert.objective == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(cert.fw_gap <= 1e-3);
  CHECK(cert.iterations <= 5);
}

TEST_CASE("solve_g_optimal: orthonormal basis is uniform with leverage d") {
  const std::size_t d = 5;
  const auto [mu, cert] = solve_g_optimal(basis_actions(d), 1e-3);
  CHECK(cert.objective >= d - 1e-9);
  CHECK(cert.objective <= (1.0 + 1e-3) * d);
  CHECK(cert.fw_gap <= 1e-3 * d);
  REQUIRE(mu.atoms.size() == d);
  for (const auto& [idx, w] : mu.atoms)
    CHECK(w == doctest::Approx(1.0 / d).epsilon(1e-6));
}

TEST_CASE("solve_g_optimal: dominated one-dimensional arm gets no mass") {
  const ActionSet acts({Action{{1.0}}, Action{{0.5}}}, 1);
  const auto [mu, cert] = solve_g_optimal(acts, 1e-3);
  REQUIRE(mu.atoms.size() == 1);
  CHECK(mu.atoms[0].first == 0);
  CHECK(mu.atoms[0].second == doctest::Approx(1.0));
  CHECK(cert.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("solve_g_optimal: square corners reach max leverage 2") {
  const auto [mu, cert] = solve_g_optimal(hypercube_corners(2), 1e-3);
  CHECK(cert.objective >= 2.0 - 1e-9);
  CHECK(cert.objective <= 2.0 * (1.0 + 1e-3));
}

TEST_CASE("solve_g_optimal: random set satisfies the leverage bounds") {
  RngStream rng(42, 9);
  std::vector<Action> racts;
  for (int i = 0; i < 30; ++i) {
    Action a;
    for (int j = 0; j < 6; ++j) a.coords.push_back(rng.uniform(-1.0, 1.0));
    racts.push_back(std::move(a));
  }
  const ActionSet acts(std::move(racts), 6);
  const auto [mu, cert] = solve_g_optimal(acts, 1e-3);
  CHECK(cert.objective >= 6.0 - 1e-9);           // d is a universal lower bound
  CHECK(cert.objective <= 6.0 * (1.0 + 1e-3));   // and tol-optimal at success
  double total = 0.0;
  for (const auto& [idx, w] : mu.atoms) {
    CHECK(idx < acts.size());
    CHECK(w >= 0.0);
    total += w;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(
      solve_g_optimal(ActionSet({Action{{1.0, 0.0}}}, 2)), std::invalid_argument);
}
