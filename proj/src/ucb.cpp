#include "cmabsm/ucb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cmabsm/errors.hpp"

namespace cmabsm {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // c * (n - k + i) / i is exact at every step; guard the multiply.
    const std::uint64_t factor = n - k + i;
    const std::uint64_t g = std::gcd(c, i);
    const std::uint64_t reduced_c = c / g;
    const std::uint64_t reduced_f = factor / (i / g);
    if (reduced_c > kMax / reduced_f) return kMax;
    c = reduced_c * reduced_f;
  }
  return c;
}

Action ActionTable::action(std::size_t rank) const {
  const auto r = row(rank);
  return Action({r.begin(), r.end()}, n_arms_);
}

ActionTable enumerate_actions(std::size_t n_arms, std::size_t slate_size, std::uint64_t cap) {
  if (slate_size < 1 || slate_size > n_arms) {
    throw InvalidDimensions("enumeration needs 1 <= K <= N (N=" + std::to_string(n_arms) +
                            ", K=" + std::to_string(slate_size) + ")");
  }
  const std::uint64_t count = binomial(n_arms, slate_size);
  if (count > cap) {
    throw CapExceeded("C(" + std::to_string(n_arms) + "," + std::to_string(slate_size) +
                      ") = " + std::to_string(count) + " exceeds the enumeration cap " +
                      std::to_string(cap));
  }

  ActionTable table;
  table.n_arms_ = n_arms;
  table.slate_size_ = slate_size;
  table.arms_.reserve(count * slate_size);

  std::vector<ArmIndex> combo(slate_size);
  std::iota(combo.begin(), combo.end(), ArmIndex{0});
  for (std::uint64_t c = 0; c < count; ++c) {
    table.arms_.insert(table.arms_.end(), combo.begin(), combo.end());
    // Lexicographic successor: bump the rightmost index that can still move.
    std::size_t pos = slate_size;
    while (pos > 0 && combo[pos - 1] == n_arms - slate_size + pos - 1) --pos;
    if (pos == 0) break;
    ++combo[pos - 1];
    for (std::size_t q = pos; q < slate_size; ++q) combo[q] = combo[q - 1] + 1;
  }
  return table;
}

UcbResult run_ucb(const Environment& env, RegretLedger& ledger, Rng& rng, std::uint64_t enum_cap) {
  const ActionTable table = enumerate_actions(env.n_arms(), env.slate_size(), enum_cap);
  const std::size_t n_actions = table.size();
  const double horizon = static_cast<double>(ledger.horizon());

  std::vector<double> gap(n_actions);
  for (std::size_t a = 0; a < n_actions; ++a) {
    gap[a] = ledger.optimal_mean() - env.exact_action_mean(table.row(a));
  }
  std::vector<double> reward_sum(n_actions, 0.0);
  std::vector<std::uint64_t> pulls(n_actions, 0);
  std::vector<std::uint32_t> survivors(n_actions);
  std::iota(survivors.begin(), survivors.end(), std::uint32_t{0});

  UcbResult result;
  result.n_actions = n_actions;
  result.eliminated_in_round.assign(n_actions, -1);

  auto estimate = [&](std::uint32_t a) {
    return pulls[a] ? reward_sum[a] / static_cast<double>(pulls[a]) : 0.0;
  };

  while (survivors.size() > 1 && !ledger.exhausted()) {
    const double radius_guess = std::ldexp(1.0, -result.rounds);
    const double log_term = std::max(1.0, std::log(horizon * radius_guess * radius_guess));
    const auto target = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(2.0 * log_term / (radius_guess * radius_guess))));

    for (std::uint32_t a : survivors) {
      if (pulls[a] >= target) continue;
      const std::uint64_t granted = std::min(target - pulls[a], ledger.remaining());
      const auto row = table.row(a);
      for (std::uint64_t i = 0; i < granted; ++i) reward_sum[a] += env.sample_action_reward(row, rng);
      pulls[a] += granted;
      ledger.credit(gap[a], granted);
      if (ledger.exhausted()) break;
    }
    if (ledger.exhausted()) break;

    const double radius = std::sqrt(log_term / (2.0 * static_cast<double>(target)));
    double leader = -std::numeric_limits<double>::infinity();
    for (std::uint32_t a : survivors) leader = std::max(leader, estimate(a));
    std::erase_if(survivors, [&](std::uint32_t a) {
      if (estimate(a) + radius >= leader - radius) return false;
      result.eliminated_in_round[a] = result.rounds;
      return true;
    });
    result.round_targets.push_back(target);
    ++result.rounds;
  }

  // Highest estimate wins; the lowest rank breaks ties.
  std::uint32_t chosen = survivors.front();
  for (std::uint32_t a : survivors) {
    if (estimate(a) > estimate(chosen)) chosen = a;
  }
  result.final_action = table.action(chosen);
  result.survivors = survivors.size();
  result.exploration_pulls = ledger.total_pulls();
  result.pulls = std::move(pulls);
  ledger.credit(gap[chosen], ledger.remaining());
  ledger.finalize();
  return result;
}

}  // namespace cmabsm
