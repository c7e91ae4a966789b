#include "cmabsm/cmab_sm.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cmabsm/errors.hpp"

namespace cmabsm {
namespace {

constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();

Action leave_one_out(std::span<const ArmIndex> members, std::size_t skip, std::size_t n_arms) {
  std::vector<ArmIndex> arms;
  arms.reserve(members.size() - 1);
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i != skip) arms.push_back(members[i]);
  }
  return Action(std::move(arms), n_arms);
}

}  // namespace

std::vector<std::vector<ArmIndex>> partition_groups(std::size_t n_arms, std::size_t slate_size) {
  const std::size_t width = slate_size + 1;
  if (slate_size < 1 || n_arms < width) {
    throw InvalidDimensions("partition needs N >= K+1 and K >= 1 (N=" + std::to_string(n_arms) +
                            ", K=" + std::to_string(slate_size) + ")");
  }
  const std::size_t n_groups = (n_arms + width - 1) / width;
  std::vector<std::vector<ArmIndex>> groups(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    groups[g].reserve(width);
    for (std::size_t i = 0; i < width; ++i) {
      // Wrapping past N - 1 pads with arms 0, 1, ...; width <= N keeps them distinct.
      groups[g].push_back(static_cast<ArmIndex>((g * width + i) % n_arms));
    }
  }
  return groups;
}

SortResult sort_group(std::span<const ArmIndex> members, const Environment& env, double lambda,
                      const RoundSchedule& schedule, RegretLedger& ledger, Rng& rng) {
  const std::size_t size = members.size();
  if (size != env.slate_size() + 1) {
    throw DimensionMismatch("sort_group expects K+1 = " + std::to_string(env.slate_size() + 1) +
                            " members, got " + std::to_string(size));
  }
  const std::size_t worst_rank = size - 1;

  std::vector<Action> actions;
  std::vector<double> gaps;
  actions.reserve(size);
  gaps.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    actions.push_back(leave_one_out(members, i, env.n_arms()));
    gaps.push_back(ledger.optimal_mean() - env.exact_action_mean(actions.back()));
  }

  std::vector<MeanEstimator> est(size);
  SortResult result;
  result.sorted_by_interval.assign(size, false);
  std::vector<std::size_t> placement(size, kFree);  // rank -> member position
  std::size_t n_sorted = 0;

  // Member positions by descending leave-one-out estimate. Equal estimates put
  // the higher arm index first, i.e. towards the worse rank.
  std::vector<std::size_t> order(size);
  auto rank_by_estimate = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (est[a].mean() != est[b].mean()) return est[a].mean() > est[b].mean();
      return members[a] > members[b];
    });
  };

  RoundSchedule s = update_round(schedule);
  while (s.delta > lambda && n_sorted < size) {
    for (std::size_t i = 0; i < size && !result.horizon_exhausted; ++i) {
      if (result.sorted_by_interval[i]) continue;
      result.horizon_exhausted =
          update_mean(est[i], actions[i], env, s.n_r, rng, ledger, gaps[i]) ==
          PullStatus::kHorizonExhausted;
    }
    if (result.horizon_exhausted) break;
    ++result.rounds;

    rank_by_estimate();
    auto separated = [&](std::size_t hi, std::size_t lo) {
      return est[order[hi]].mean() - s.delta > est[order[lo]].mean() + s.delta;
    };
    for (std::size_t p = 0; p < size; ++p) {
      const std::size_t m = order[p];
      const std::size_t rank = worst_rank - p;
      if (result.sorted_by_interval[m] || placement[rank] != kFree) continue;
      const bool clear_above = p == 0 || separated(p - 1, p);
      const bool clear_below = p == worst_rank || separated(p, p + 1);
      if (clear_above && clear_below) {
        placement[rank] = m;
        result.sorted_by_interval[m] = true;
        ++n_sorted;
      }
    }
    s = update_round(s);
  }

  // Unresolved members take the free ranks in point-estimate order.
  rank_by_estimate();
  std::size_t next_rank = worst_rank;
  for (std::size_t p = 0; p < size; ++p) {
    const std::size_t m = order[p];
    if (result.sorted_by_interval[m]) continue;
    while (placement[next_rank] != kFree) --next_rank;
    placement[next_rank] = m;
  }

  result.ranking.reserve(size);
  for (std::size_t rank = 0; rank < size; ++rank) result.ranking.push_back(members[placement[rank]]);
  result.best = Action({result.ranking.begin(), result.ranking.end() - 1}, env.n_arms());
  return result;
}

MergeResult merge_groups(std::span<const ArmIndex> base, std::span<const ArmIndex> incoming,
                         const Environment& env, double lambda, const RoundSchedule& schedule,
                         RegretLedger& ledger, Rng& rng) {
  const std::size_t k = env.slate_size();
  if (base.size() != k || incoming.size() != k) {
    throw DimensionMismatch("merge_groups expects two lists of K = " + std::to_string(k) + " arms");
  }
  const Action base_action({base.begin(), base.end()}, env.n_arms());
  const double base_gap = ledger.optimal_mean() - env.exact_action_mean(base_action);

  MergeResult result;
  result.ranking.reserve(k);
  MeanEstimator base_est;
  RoundSchedule base_round = update_round(schedule);

  std::size_t i = 0;
  std::size_t j = 0;
  auto taken = [&](ArmIndex arm) {
    return base_action.contains(arm) ||
           std::find(result.ranking.begin(), result.ranking.end(), arm) != result.ranking.end();
  };

  while (result.ranking.size() < k) {
    while (j < k && taken(incoming[j])) ++j;
    if (j == k || result.horizon_exhausted) {
      result.ranking.push_back(base[i++]);
      continue;
    }
    if (i == k) {
      result.ranking.push_back(incoming[j++]);
      continue;
    }

    std::vector<ArmIndex> swapped(base.begin(), base.end());
    swapped[i] = incoming[j];
    const Action candidate(std::move(swapped), env.n_arms());
    const double candidate_gap = ledger.optimal_mean() - env.exact_action_mean(candidate);
    MeanEstimator cand_est;
    RoundSchedule cand_round = update_round(schedule);
    ++result.comparisons;

    std::optional<bool> incoming_wins;
    while (cand_round.delta > lambda && !incoming_wins) {
      if (update_mean(base_est, base_action, env, base_round.n_r, rng, ledger, base_gap) ==
              PullStatus::kHorizonExhausted ||
          update_mean(cand_est, candidate, env, cand_round.n_r, rng, ledger, candidate_gap) ==
              PullStatus::kHorizonExhausted) {
        result.horizon_exhausted = true;
        break;
      }
      if (base_est.mean() + base_round.delta < cand_est.mean() - cand_round.delta) {
        incoming_wins = true;
      } else if (cand_est.mean() + cand_round.delta < base_est.mean() - base_round.delta) {
        incoming_wins = false;
      }
      cand_round = update_round(cand_round);
      if (cand_round.r > base_round.r) base_round = update_round(base_round);
    }
    if (!incoming_wins) {
      if (cand_est.mean() != base_est.mean()) {
        incoming_wins = cand_est.mean() > base_est.mean();
      } else {
        incoming_wins = incoming[j] < base[i];
      }
    }
    if (*incoming_wins) {
      result.ranking.push_back(incoming[j++]);
    } else {
      result.ranking.push_back(base[i++]);
    }
  }
  return result;
}

CmabSmResult run_cmab_sm(const Environment& env, RegretLedger& ledger, Rng& rng,
                         const CmabSmOptions& options) {
  const std::size_t n = env.n_arms();
  const std::size_t k = env.slate_size();
  const auto groups = partition_groups(n, k);

  EstimatorProbe::reset_peak();
  const std::size_t live_before = EstimatorProbe::live();

  CmabSmResult result;
  result.lambda = options.lambda_override.value_or(
      compute_lambda(n, ledger.horizon(), options.lipschitz));
  const RoundSchedule start = RoundSchedule::initial(ledger.horizon(), n, k, options.formula);

  SortResult first = sort_group(groups.front(), env, result.lambda, start, ledger, rng);
  std::vector<ArmIndex> best(first.ranking.begin(), first.ranking.begin() + static_cast<long>(k));
  result.horizon_exhausted = first.horizon_exhausted;

  for (std::size_t g = 1; g < groups.size() && !result.horizon_exhausted; ++g) {
    SortResult sorted = sort_group(groups[g], env, result.lambda, start, ledger, rng);
    if (sorted.horizon_exhausted) {
      result.horizon_exhausted = true;
      break;
    }
    const std::span<const ArmIndex> top(sorted.ranking.data(), k);
    MergeResult merged = merge_groups(best, top, env, result.lambda, start, ledger, rng);
    best = std::move(merged.ranking);
    result.horizon_exhausted = merged.horizon_exhausted;
  }

  result.final_action = Action(std::move(best), n);
  result.exploration_pulls = ledger.total_pulls();
  ledger.credit(ledger.optimal_mean() - env.exact_action_mean(result.final_action),
                ledger.remaining());
  ledger.finalize();
  result.peak_live_estimators = EstimatorProbe::peak() - live_before;
  return result;
}

}  // namespace cmabsm
