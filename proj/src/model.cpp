#include "sparsebandit/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "sparsebandit/kernels.hpp"

namespace sparsebandit {

double Action::dot(const std::vector<double>& v) const {
  if (v.size() != coords.size())
    throw std::invalid_argument("Action::dot: dimension mismatch");
  return kernels::dot(coords.data(), v.data(), coords.size());
}

namespace {

// Hash of the exact coordinate bit patterns, for duplicate detection.
struct ActionHash {
  std::size_t operator()(const Action* a) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double c : a->coords) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(c));
      __builtin_memcpy(&bits, &c, sizeof(bits));
      h ^= bits;
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};
struct ActionEq {
  bool operator()(const Action* a, const Action* b) const { return *a == *b; }
};

}  // namespace

ActionSet::ActionSet(std::vector<Action> actions, std::size_t dim)
    : actions_(std::move(actions)), dim_(dim) {
  if (actions_.empty()) throw std::invalid_argument("ActionSet: empty");
  if (dim_ == 0) throw std::invalid_argument("ActionSet: dim must be positive");
  std::unordered_set<const Action*, ActionHash, ActionEq> seen;
  seen.reserve(actions_.size());
  for (const Action& a : actions_) {
    if (a.coords.size() != dim_)
      throw std::invalid_argument("ActionSet: action dimension mismatch");
    for (double c : a.coords) {
      if (!(std::fabs(c) <= 1.0))
        throw std::invalid_argument("ActionSet: ||x||_inf must be <= 1");
    }
    if (!seen.insert(&a).second)
      throw std::invalid_argument("ActionSet: duplicate action");
  }
}

void SparseInstance::validate() const {
  std::size_t nnz = 0;
  for (double v : theta)
    if (v != 0.0) ++nnz;
  if (nnz > sparsity_bound)
    throw std::invalid_argument("SparseInstance: ||theta||_0 exceeds sparsity_bound");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
    throw std::invalid_argument("SparseInstance: noise_std must be >= 0");
}

void RegretTrajectory::record(std::size_t action_index, double reward,
                              double instant_regret) {
  const std::size_t t = steps.size() + 1;
  steps.push_back({t, action_index, reward, instant_regret});
  const double prev = cumulative.empty() ? 0.0 : cumulative.back();
  cumulative.push_back(prev + instant_regret);
}

void RegretTrajectory::recount_informative(const std::vector<std::size_t>& subset) {
  std::unordered_set<std::size_t> in(subset.begin(), subset.end());
  informative_pulls = 0;
  for (const TrajectoryStep& s : steps)
    if (in.count(s.action_index)) ++informative_pulls;
}

std::pair<std::size_t, double> optimal_action(const SparseInstance& instance,
                                              const ActionSet& actions) {
  if (instance.dim() != actions.dim())
    throw std::invalid_argument("optimal_action: dimension mismatch");
  std::size_t best = 0;
  double best_val = actions[0].dot(instance.theta);
  for (std::size_t i = 1; i < actions.size(); ++i) {
    const double v = actions[i].dot(instance.theta);
    if (v > best_val) {  // strict: ties keep the lowest index
      best_val = v;
      best = i;
    }
  }
  return {best, best_val};
}

double sample_reward(const SparseInstance& instance, const Action& action,
                     RngStream& rng) {
  if (instance.dim() != action.dim())
    throw std::invalid_argument("sample_reward: dimension mismatch");
  const double mean = action.dot(instance.theta);
  if (instance.noise_std == 0.0) return mean;
  return mean + instance.noise_std * rng.normal();
}

double suboptimality_gap(const SparseInstance& instance, const ActionSet& actions,
                         std::size_t index) {
  if (index >= actions.size())
    throw std::out_of_range("suboptimality_gap: index out of range");
  const auto [best, best_val] = optimal_action(instance, actions);
  (void)best;
  return best_val - actions[index].dot(instance.theta);
}

std::vector<double> all_gaps(const SparseInstance& instance,
                             const ActionSet& actions) {
  const auto [best, best_val] = optimal_action(instance, actions);
  (void)best;
  std::vector<double> gaps(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i)
    gaps[i] = best_val - actions[i].dot(instance.theta);
  return gaps;
}

}  // namespace sparsebandit
