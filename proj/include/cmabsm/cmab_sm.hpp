#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cmabsm/action.hpp"
#include "cmabsm/core.hpp"
#include "cmabsm/env.hpp"
#include "cmabsm/rng.hpp"

namespace cmabsm {

// ceil(N / (K+1)) blocks of K+1 consecutive arms; a short last block is padded
// with arms 0, 1, ... Throws InvalidDimensions when N < K+1.
std::vector<std::vector<ArmIndex>> partition_groups(std::size_t n_arms, std::size_t slate_size);

struct SortResult {
  std::vector<ArmIndex> ranking;  // all K+1 members, best first
  Action best;                    // top K of `ranking`
  std::vector<bool> sorted_by_interval;  // per member, in input order
  int rounds = 0;
  bool horizon_exhausted = false;
};

// Ranks K+1 arms by playing their K+1 leave-one-out actions in rounds of
// halving confidence radius. The member whose leave-one-out action earns the
// most is the worst arm. `schedule` is the r = 0 schedule to start from.
SortResult sort_group(std::span<const ArmIndex> members, const Environment& env, double lambda,
                      const RoundSchedule& schedule, RegretLedger& ledger, Rng& rng);

struct MergeResult {
  std::vector<ArmIndex> ranking;  // K arms, best first
  std::size_t comparisons = 0;    // candidate actions actually played
  bool horizon_exhausted = false;
};

// Best K of base ∪ incoming (each given best first), decided one slot at a
// time by comparing the base action against base with base[i] swapped for
// incoming[j].
MergeResult merge_groups(std::span<const ArmIndex> base, std::span<const ArmIndex> incoming,
                         const Environment& env, double lambda, const RoundSchedule& schedule,
                         RegretLedger& ledger, Rng& rng);

struct CmabSmOptions {
  double lipschitz = 1.0;
  PullTargetFormula formula = PullTargetFormula::kTwoLogTNK;
  std::optional<double> lambda_override;
};

struct CmabSmResult {
  Action final_action;
  double lambda = 0.0;
  std::uint64_t exploration_pulls = 0;
  std::size_t peak_live_estimators = 0;
  bool horizon_exhausted = false;
};

// Sort the first group, then sort-and-merge every further group into the
// running best K, then commit to the result for the rest of the horizon.
// The horizon is ledger.horizon(); every pull is credited to the ledger.
CmabSmResult run_cmab_sm(const Environment& env, RegretLedger& ledger, Rng& rng,
                         const CmabSmOptions& options = {});

}  // namespace cmabsm
