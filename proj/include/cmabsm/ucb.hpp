#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cmabsm/action.hpp"
#include "cmabsm/core.hpp"
#include "cmabsm/env.hpp"
#include "cmabsm/rng.hpp"

namespace cmabsm {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

// All C(N, K) actions in lexicographic order, stored flat (K indices per row).
class ActionTable {
 public:
  std::size_t n_arms() const noexcept { return n_arms_; }
  std::size_t slate_size() const noexcept { return slate_size_; }
  std::size_t size() const noexcept { return slate_size_ ? arms_.size() / slate_size_ : 0; }

  std::span<const ArmIndex> row(std::size_t rank) const noexcept {
    return {arms_.data() + rank * slate_size_, slate_size_};
  }
  Action action(std::size_t rank) const;

 private:
  friend ActionTable enumerate_actions(std::size_t, std::size_t, std::uint64_t);

  std::size_t n_arms_ = 0;
  std::size_t slate_size_ = 0;
  std::vector<ArmIndex> arms_;
};

// Throws CapExceeded when C(N, K) > cap, InvalidDimensions unless 1 <= K <= N.
ActionTable enumerate_actions(std::size_t n_arms, std::size_t slate_size,
                              std::uint64_t cap = kDefaultEnumerationCap);

struct UcbResult {
  Action final_action;
  std::uint64_t exploration_pulls = 0;  // pulls before committing
  std::size_t n_actions = 0;
  std::size_t survivors = 0;
  int rounds = 0;
  std::vector<std::uint64_t> round_targets;  // n_m per completed round
  std::vector<std::uint64_t> pulls;          // exploration pulls per action rank
  std::vector<int> eliminated_in_round;      // -1 for survivors
};

// Improved UCB with elimination over the full action space. Round m uses the
// guess radius 2^-m; survivors are pulled up to
// n_m = ceil(2 ln(T d^2) / d^2) and those whose upper bound falls below the
// leader's lower bound are dropped. After one survivor remains (or the
// horizon runs out) the best estimate is played for the rest of the horizon.
UcbResult run_ucb(const Environment& env, RegretLedger& ledger, Rng& rng,
                  std::uint64_t enum_cap = kDefaultEnumerationCap);

}  // namespace cmabsm
