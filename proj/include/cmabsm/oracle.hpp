#pragma once

#include <cstddef>
#include <cstdint>

#include "cmabsm/action.hpp"
#include "cmabsm/env.hpp"
#include "cmabsm/rng.hpp"
#include "cmabsm/ucb.hpp"

namespace cmabsm {

struct BestAction {
  Action action;
  double mean = 0.0;
};

// Exhaustive argmax of the exact action mean; lexicographically first on ties.
BestAction best_action_exact(const Environment& env, std::uint64_t enum_cap = kDefaultEnumerationCap);

// mu(a*) - mu(a), using the exhaustive optimum.
double action_gap(const Environment& env, const Action& action,
                  std::uint64_t enum_cap = kDefaultEnumerationCap);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // Hoeffding, failure probability 1e-3
};

MonteCarloEstimate mc_action_mean(const Environment& env, const Action& action,
                                  std::uint64_t n_samples, Rng& rng);

// Horizon beyond which enumerative UCB's regret overtakes CMAB-SM's:
// e^(3K) N^(3K-2) / K^(3K+3). The log form is exposed for sweeps that leave
// the double range.
double log_crossover_horizon(std::size_t n_arms, std::size_t slate_size);
double crossover_horizon(std::size_t n_arms, std::size_t slate_size);

}  // namespace cmabsm
