#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

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

}  // namespace

TEST_CASE("ActionSet validation") {
  SUBCASE("empty set rejected") {
    CHECK_THROWS_AS(ActionSet({}, 2), std::invalid_argument);
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(ActionSet({Action{{1.0, 0.0}}, Action{{1.0}}}, 2),
                    std::invalid_argument);
  }
  SUBCASE("max-norm bound enforced") {
    CHECK_THROWS_AS(ActionSet({Action{{1.5, 0.0}}}, 2), std::invalid_argument);
    CHECK_NOTHROW(ActionSet({Action{{1.0, -1.0}}}, 2));
  }
  SUBCASE("exact duplicates rejected") {
    CHECK_THROWS_AS(ActionSet({Action{{0.5, 0.5}}, Action{{0.5, 0.5}}}, 2),
                    std::invalid_argument);
    CHECK_NOTHROW(ActionSet({Action{{0.5, 0.5}}, Action{{0.5, 0.5 + 1e-12}}}, 2));
  }
}

TEST_CASE("SparseInstance validation") {
  SparseInstance inst;
  inst.theta = {1.0, 0.0, -0.5};
  inst.sparsity_bound = 2;
  inst.noise_std = 1.0;
  CHECK_NOTHROW(inst.validate());
  inst.sparsity_bound = 1;
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
  inst.sparsity_bound = 2;
  inst.noise_std = -1.0;
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);
  inst.noise_std = 0.0;  // allowed for noiseless tests
  CHECK_NOTHROW(inst.validate());
}

TEST_CASE("optimal_action: identity case") {
  const auto acts = basis_actions(2);
  SparseInstance inst{{1.0, 0.0}, 1, 1.0};
  const auto [idx, val] = optimal_action(inst, acts);
  CHECK(idx == 0);
  CHECK(val == doctest::Approx(1.0));
}

TEST_CASE("optimal_action: all-tie case returns the first action") {
  const auto acts = basis_actions(3);
  SparseInstance inst{{0.0, 0.0, 0.0}, 0, 1.0};
  const auto [idx, val] = optimal_action(inst, acts);
  CHECK(idx == 0);
  CHECK(val == doctest::Approx(0.0));
}

TEST_CASE("optimal_action: dimension mismatch throws") {
  const auto acts = basis_actions(3);
  SparseInstance inst{{1.0, 0.0}, 1, 1.0};
  CHECK_THROWS_AS(optimal_action(inst, acts), std::invalid_argument);
}

TEST_CASE("optimal_action on a sign-pattern environment") {
  // theta = (eps, eps, 0, ..., 0, -1); best action sets +1 on the first s-1
  // coordinates and 0 on the last: value (s-1)*eps.
  const std::size_t d = 6, s = 3;
  const double eps = 0.25;
  std::vector<double> theta(d, 0.0);
  for (std::size_t i = 0; i + 1 < s; ++i) theta[i] = eps;
  theta[d - 1] = -1.0;

  std::vector<Action> acts;
  Action star;
  star.coords.assign(d, 0.0);
  star.coords[0] = star.coords[1] = 1.0;
  acts.push_back(star);
  Action worse;  // flips one sign
  worse.coords.assign(d, 0.0);
  worse.coords[0] = 1.0;
  worse.coords[1] = -1.0;
  acts.push_back(worse);
  Action penalized;  // touches the last coordinate
  penalized.coords.assign(d, 0.0);
  penalized.coords[0] = penalized.coords[1] = 1.0;
  penalized.coords[d - 1] = 1.0;
  acts.push_back(penalized);
  const ActionSet aset(std::move(acts), d);

  SparseInstance inst{theta, s, 1.0};
  const auto [idx, val] = optimal_action(inst, aset);
  CHECK(idx == 0);
  CHECK(val == doctest::Approx((s - 1) * eps));
  // The penalized action pays the +1 coordinate against theta_d = -1.
  CHECK(suboptimality_gap(inst, aset, 2) == doctest::Approx(1.0));
  CHECK(suboptimality_gap(inst, aset, 1) == doctest::Approx(2 * eps));
}

TEST_CASE("sample_reward: noiseless limit is the exact inner product") {
  SparseInstance inst{{0.5, -0.25}, 2, 0.0};
  RngStream rng(1, 1);
  Action a{{1.0, 1.0}};
  for (int i = 0; i < 10; ++i)
    CHECK(sample_reward(inst, a, rng) == 0.25);  // exact: no noise drawn
}

TEST_CASE("sample_reward: Monte Carlo mean and variance") {
  SparseInstance inst{{1.0}, 1, 1.0};
  Action a{{1.0}};
  RngStream rng(2024, 3);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = sample_reward(inst, a, rng);
    sum += y;
    sumsq += y * y;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean - 1.0) < 3e-2);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));

  // Non-unit noise_std scales the variance.
  SparseInstance inst2{{0.0}, 0, 2.5};
  double sum2 = 0.0, sumsq2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = sample_reward(inst2, a, rng);
    sum2 += y;
    sumsq2 += y * y;
  }
  const double var2 = sumsq2 / n - (sum2 / n) * (sum2 / n);
  CHECK(var2 == doctest::Approx(6.25).epsilon(0.05));
}

TEST_CASE("sample_reward determinism: identical streams give identical draws") {
  SparseInstance inst{{0.3, 0.7}, 2, 1.0};
  Action a{{1.0, -1.0}};
  RngStream r1(9, 4), r2(9, 4);
  for (int i = 0; i < 100; ++i)
    CHECK(sample_reward(inst, a, r1) == sample_reward(inst, a, r2));
}

TEST_CASE("suboptimality_gap basics") {
  const auto acts = basis_actions(3);
  SparseInstance inst{{0.9, 0.2, -0.4}, 3, 1.0};
  CHECK(suboptimality_gap(inst, acts, 0) == doctest::Approx(0.0));
  CHECK(suboptimality_gap(inst, acts, 1) == doctest::Approx(0.7));
  CHECK(suboptimality_gap(inst, acts, 2) == doctest::Approx(1.3));
  CHECK_THROWS_AS(suboptimality_gap(inst, acts, 3), std::out_of_range);

  SparseInstance zero{{0.0, 0.0, 0.0}, 0, 1.0};
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(suboptimality_gap(zero, acts, i) == doctest::Approx(0.0));
}

TEST_CASE("all_gaps matches per-index gaps") {
  const auto acts = basis_actions(4);
  SparseInstance inst{{0.1, 0.8, -0.3, 0.0}, 4, 1.0};
  const auto gaps = all_gaps(inst, acts);
  REQUIRE(gaps.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(gaps[i] == doctest::Approx(suboptimality_gap(inst, acts, i)));
    CHECK(gaps[i] >= 0.0);
  }
}

TEST_CASE("RegretTrajectory accounting") {
  RegretTrajectory traj;
  traj.record(2, 0.5, 0.1);
  traj.record(0, 1.5, 0.0);
  traj.record(2, -0.2, 0.4);
  REQUIRE(traj.rounds() == 3);
  // Steps are 1..n with no gaps.
  for (std::size_t t = 0; t < 3; ++t) CHECK(traj.steps[t].round == t + 1);
  // Cumulative is the running sum and non-decreasing.
  CHECK(traj.cumulative[0] == doctest::Approx(0.1));
  CHECK(traj.cumulative[1] == doctest::Approx(0.1));
  CHECK(traj.cumulative[2] == doctest::Approx(0.5));
  CHECK(traj.total_regret() == doctest::Approx(0.5));
  double run = 0.0;
  for (std::size_t t = 0; t < 3; ++t) {
    run += traj.steps[t].instant_regret;
    CHECK(traj.cumulative[t] == doctest::Approx(run));
    if (t > 0) CHECK(traj.cumulative[t] >= traj.cumulative[t - 1]);
  }

  traj.recount_informative({2});
  CHECK(traj.informative_pulls == 2);
  traj.recount_informative({0, 1});
  CHECK(traj.informative_pulls == 1);
  traj.recount_informative({});
  CHECK(traj.informative_pulls == 0);
}
