#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "cmabsm/cmab_sm.hpp"
#include "cmabsm/errors.hpp"
#include "cmabsm/oracle.hpp"
#include "test_oracles.hpp"

namespace cmabsm {
namespace {

std::vector<ArmDistribution> bernoullis(const std::vector<double>& ps) {
  std::vector<ArmDistribution> arms;
  for (double p : ps) arms.push_back(ArmDistribution::bernoulli(p));
  return arms;
}

RoundSchedule start(const Environment& env, std::uint64_t horizon) {
  return RoundSchedule::initial(horizon, env.n_arms(), env.slate_size());
}

// Arms ranked by the exact means of their leave-one-out actions: the arm whose
// removal costs the most comes first.
std::vector<ArmIndex> exact_leave_one_out_ranking(const Environment& env,
                                                  const std::vector<ArmIndex>& members) {
  std::vector<double> loo(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    std::vector<ArmIndex> rest;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (j != i) rest.push_back(members[j]);
    }
    loo[i] = -env.exact_action_mean(Action(rest, env.n_arms()));
  }
  std::vector<ArmIndex> ranking;
  for (std::size_t idx : testing::top_k_indices(loo, members.size())) ranking.push_back(members[idx]);
  return ranking;
}

TEST(Partition, ExactBlocks) {
  const auto g = partition_groups(12, 2);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0], (std::vector<ArmIndex>{0, 1, 2}));
  EXPECT_EQ(g[3], (std::vector<ArmIndex>{9, 10, 11}));
  const auto g5 = partition_groups(12, 5);
  ASSERT_EQ(g5.size(), 2u);
  EXPECT_EQ(g5[1], (std::vector<ArmIndex>{6, 7, 8, 9, 10, 11}));
}

TEST(Partition, PadsLastBlockFromArmZero) {
  const auto g = partition_groups(10, 3);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0], (std::vector<ArmIndex>{0, 1, 2, 3}));
  EXPECT_EQ(g[1], (std::vector<ArmIndex>{4, 5, 6, 7}));
  EXPECT_EQ(g[2], (std::vector<ArmIndex>{8, 9, 0, 1}));
}

TEST(Partition, CoversEveryArmWithDistinctMembers) {
  for (std::size_t n = 2; n <= 30; ++n) {
    for (std::size_t k = 1; k + 1 <= n; ++k) {
      std::set<ArmIndex> seen;
      for (const auto& block : partition_groups(n, k)) {
        ASSERT_EQ(block.size(), k + 1);
        ASSERT_EQ(std::set<ArmIndex>(block.begin(), block.end()).size(), k + 1);
        seen.insert(block.begin(), block.end());
      }
      ASSERT_EQ(seen.size(), n);
    }
  }
}

TEST(Partition, RejectsTooFewArms) {
  EXPECT_THROW(partition_groups(3, 3), InvalidDimensions);
  EXPECT_THROW(partition_groups(3, 0), InvalidDimensions);
}

TEST(Sort, SeparatedBernoulliGroup) {
  const Environment env(bernoullis({0.9, 0.5, 0.1}), RewardFunction::kNormalizedSum, 2);
  EXPECT_NEAR(env.exact_action_mean(Action({0, 1}, 3)), 0.7, 1e-15);
  const std::vector<ArmIndex> members = {0, 1, 2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RegretLedger ledger(1'000'000, 0.7, 20'000);
    Rng rng(seed);
    const SortResult r = sort_group(members, env, 0.01, start(env, 1'000'000), ledger, rng);
    EXPECT_EQ(r.ranking, (std::vector<ArmIndex>{0, 1, 2}));
    EXPECT_EQ(r.best, Action({0, 1}, 3));
    EXPECT_EQ(r.sorted_by_interval, (std::vector<bool>{true, true, true}));
    EXPECT_FALSE(r.horizon_exhausted);
  }
}

TEST(Sort, EqualEstimatesExitAtThresholdWithIndexTieBreak) {
  const double top = 1.0 - 1e-12;
  const Environment env(bernoullis({top - 2e-12, top, top - 1e-12}), RewardFunction::kNormalizedSum, 2);
  RegretLedger ledger(1'000'000, 1.0, 20'000);
  Rng rng(1);
  const std::vector<ArmIndex> members = {2, 0, 1};
  const SortResult r = sort_group(members, env, 0.2, start(env, 1'000'000), ledger, rng);
  EXPECT_EQ(r.rounds, 2);
  EXPECT_EQ(r.sorted_by_interval, (std::vector<bool>{false, false, false}));
  EXPECT_EQ(r.ranking, (std::vector<ArmIndex>{0, 1, 2}));
}

TEST(Sort, WideFirstRoundSortsNothing) {
  const Environment env(bernoullis({0.9, 0.5, 0.1}), RewardFunction::kNormalizedSum, 2);
  RegretLedger ledger(1'000'000, 0.7, 20'000);
  Rng rng(2);
  const std::vector<ArmIndex> members = {0, 1, 2};
  const SortResult r = sort_group(members, env, 0.3, start(env, 1'000'000), ledger, rng);
  EXPECT_EQ(r.rounds, 1);
  EXPECT_EQ(std::count(r.sorted_by_interval.begin(), r.sorted_by_interval.end(), true), 0);
  EXPECT_EQ(ledger.total_pulls(), 3 * update_round(start(env, 1'000'000)).n_r);
}

TEST(Sort, RejectsWrongGroupSize) {
  const Environment env(bernoullis({0.9, 0.5, 0.1}), RewardFunction::kNormalizedSum, 2);
  RegretLedger ledger(1000, 0.7, 100);
  Rng rng(0);
  const std::vector<ArmIndex> members = {0, 1};
  EXPECT_THROW(sort_group(members, env, 0.1, start(env, 1000), ledger, rng), DimensionMismatch);
}

TEST(Sort, StopsAtHorizonWithFullRanking) {
  const Environment env(bernoullis({0.9, 0.5, 0.1}), RewardFunction::kNormalizedSum, 2);
  RegretLedger ledger(200, 0.7, 100);
  Rng rng(3);
  const std::vector<ArmIndex> members = {0, 1, 2};
  const SortResult r = sort_group(members, env, 0.01, start(env, 200), ledger, rng);
  EXPECT_TRUE(r.horizon_exhausted);
  EXPECT_EQ(ledger.total_pulls(), 200u);
  EXPECT_EQ(std::set<ArmIndex>(r.ranking.begin(), r.ranking.end()).size(), 3u);
}

TEST(SortProperty, OutputIsPermutationOfMembers) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 1 + trial % 5;
    const std::size_t n = k + 1 + trial % 4;
    std::vector<double> ps(n);
    for (auto& p : ps) p = u(gen);
    const Environment env(bernoullis(ps), trial % 3 == 0 ? RewardFunction::kMax
                                                         : RewardFunction::kNormalizedSum,
                          k);
    std::vector<ArmIndex> members(n);
    std::iota(members.begin(), members.end(), ArmIndex{0});
    std::shuffle(members.begin(), members.end(), gen);
    members.resize(k + 1);
    RegretLedger ledger(100'000, 1.0, 20'000);
    Rng rng(trial);
    const double lambda = 0.05 + 0.1 * (trial % 4);
    const SortResult r = sort_group(members, env, lambda, start(env, 100'000), ledger, rng);
    auto sorted_members = members;
    auto sorted_ranking = r.ranking;
    std::sort(sorted_members.begin(), sorted_members.end());
    std::sort(sorted_ranking.begin(), sorted_ranking.end());
    ASSERT_EQ(sorted_ranking, sorted_members);
    ASSERT_EQ(r.best, Action({r.ranking.begin(), r.ranking.end() - 1}, n));
  }
}

TEST(SortProperty, RecoversExactRankingOnWellSeparatedGroups) {
  // Leave-one-out gaps of 0.2/3 exceed 8 * 2^-7.
  const Environment env(bernoullis({0.3, 0.9, 0.5, 0.7, 0.1}), RewardFunction::kNormalizedSum, 3);
  std::vector<ArmIndex> members = {0, 1, 2, 3};
  std::mt19937_64 gen(8);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::shuffle(members.begin(), members.end(), gen);
    RegretLedger ledger(10'000'000, 1.0, 100'000);
    Rng rng(seed);
    const SortResult r = sort_group(members, env, 0.01, start(env, 10'000'000), ledger, rng);
    EXPECT_EQ(r.ranking, exact_leave_one_out_ranking(env, members));
    EXPECT_EQ(r.ranking, (std::vector<ArmIndex>{1, 3, 2, 0}));
  }
}

TEST(Merge, PicksTopTwoOfBoth) {
  const Environment env(bernoullis({0.9, 0.7, 0.8, 0.6}), RewardFunction::kNormalizedSum, 2);
  const std::vector<ArmIndex> base = {0, 1};
  const std::vector<ArmIndex> incoming = {2, 3};
  RegretLedger ledger(10'000'000, 0.85, 100'000);
  Rng rng(1);
  const MergeResult r = merge_groups(base, incoming, env, 0.01, start(env, 10'000'000), ledger, rng);
  EXPECT_EQ(r.ranking, (std::vector<ArmIndex>{0, 2}));
  EXPECT_EQ(r.comparisons, 2u);
}

TEST(Merge, DominatedIncomingLeavesBaseUnchanged) {
  const Environment env(bernoullis({0.9, 0.8, 0.2, 0.1}), RewardFunction::kNormalizedSum, 2);
  const std::vector<ArmIndex> base = {0, 1};
  const std::vector<ArmIndex> incoming = {2, 3};
  RegretLedger ledger(10'000'000, 0.85, 100'000);
  Rng rng(2);
  const MergeResult r = merge_groups(base, incoming, env, 0.01, start(env, 10'000'000), ledger, rng);
  EXPECT_EQ(r.ranking, base);
  EXPECT_EQ(r.comparisons, 2u);
}

TEST(Merge, IdenticalListsNeedNoComparison) {
  const Environment env(bernoullis({0.9, 0.8, 0.2}), RewardFunction::kNormalizedSum, 2);
  const std::vector<ArmIndex> base = {0, 1};
  RegretLedger ledger(1000, 0.85, 100);
  Rng rng(3);
  const MergeResult r = merge_groups(base, base, env, 0.01, start(env, 1000), ledger, rng);
  EXPECT_EQ(r.ranking, base);
  EXPECT_EQ(r.comparisons, 0u);
  EXPECT_EQ(ledger.total_pulls(), 0u);
}

TEST(Merge, SkipsIncomingArmsAlreadyInBase) {
  const Environment env(bernoullis({0.9, 0.1, 0.8, 0.5, 0.3}), RewardFunction::kNormalizedSum, 3);
  const std::vector<ArmIndex> base = {2, 3, 1};
  const std::vector<ArmIndex> incoming = {0, 2, 4};
  RegretLedger ledger(10'000'000, 1.0, 100'000);
  Rng rng(4);
  const MergeResult r = merge_groups(base, incoming, env, 0.01, start(env, 10'000'000), ledger, rng);
  EXPECT_EQ(r.ranking, (std::vector<ArmIndex>{0, 2, 3}));
}

TEST(MergeProperty, MatchesTopKOnSeparatedGrid) {
  const std::vector<double> grid = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::uint64_t seed = 0;
  for (auto fn : {RewardFunction::kNormalizedSum, RewardFunction::kMax}) {
    // Choose 4 of the 5 grid values and every split into two pairs.
    for (std::size_t drop = 0; drop < grid.size(); ++drop) {
      std::vector<double> ps;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i != drop) ps.push_back(grid[i]);
      }
      const Environment env(bernoullis(ps), fn, 2);
      for (ArmIndex partner = 1; partner < 4; ++partner) {
        std::vector<ArmIndex> base = {0, partner};
        std::vector<ArmIndex> incoming;
        for (ArmIndex a = 1; a < 4; ++a) {
          if (a != partner) incoming.push_back(a);
        }
        auto by_mean = [&](ArmIndex a, ArmIndex b) { return ps[a] > ps[b]; };
        std::sort(base.begin(), base.end(), by_mean);
        std::sort(incoming.begin(), incoming.end(), by_mean);
        for (int swap_roles = 0; swap_roles < 2; ++swap_roles) {
          RegretLedger ledger(100'000'000, 1.0, 1'000'000);
          Rng rng(seed++);
          const MergeResult r = merge_groups(swap_roles ? incoming : base, swap_roles ? base : incoming,
                                             env, 0.01, start(env, 100'000'000), ledger, rng);
          ASSERT_EQ(r.ranking.size(), 2u);
          ASSERT_NE(r.ranking[0], r.ranking[1]);
          std::set<ArmIndex> got(r.ranking.begin(), r.ranking.end());
          std::set<ArmIndex> want;
          for (std::size_t idx : testing::top_k_indices(ps, 2)) want.insert(static_cast<ArmIndex>(idx));
          EXPECT_EQ(got, want) << to_string(fn) << " drop=" << drop << " partner=" << partner;
        }
      }
    }
  }
}

TEST(MergeProperty, OutputIsDistinctSubsetOfInputs) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t k = 1 + trial % 4;
    const std::size_t n = 2 * k + 1;
    std::vector<double> ps(n);
    for (auto& p : ps) p = u(gen);
    const Environment env(bernoullis(ps), RewardFunction::kNormalizedSum, k);
    std::vector<ArmIndex> pool(n);
    std::iota(pool.begin(), pool.end(), ArmIndex{0});
    std::shuffle(pool.begin(), pool.end(), gen);
    std::vector<ArmIndex> base(pool.begin(), pool.begin() + k);
    // Overlap with base on odd trials, as padding produces.
    std::vector<ArmIndex> incoming(pool.begin() + k - (trial % 2), pool.begin() + 2 * k - (trial % 2));
    RegretLedger ledger(200'000, 1.0, 20'000);
    Rng rng(trial);
    const MergeResult r = merge_groups(base, incoming, env, 0.1, start(env, 200'000), ledger, rng);
    ASSERT_EQ(r.ranking.size(), k);
    ASSERT_EQ(std::set<ArmIndex>(r.ranking.begin(), r.ranking.end()).size(), k);
    for (ArmIndex a : r.ranking) {
      ASSERT_TRUE(std::count(base.begin(), base.end(), a) || std::count(incoming.begin(), incoming.end(), a));
    }
  }
}

TEST(Run, ConservesHorizonAndBoundsFinalGap) {
  const Environment env(bernoullis({0.5, 0.1, 0.9, 0.3, 0.7}), RewardFunction::kNormalizedSum, 2);
  const BestAction best = best_action_exact(env);
  const std::uint64_t horizon = 1'000'000;
  const double bound = compute_lambda(5, horizon, 1.0) * std::sqrt(2.0) + std::sqrt(2.0) / (5.0 * 1e12);
  int within = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RegretLedger ledger(horizon, best.mean, 20'000);
    Rng rng(seed);
    const CmabSmResult r = run_cmab_sm(env, ledger, rng);
    ASSERT_EQ(ledger.total_pulls(), horizon);
    ASSERT_FALSE(r.horizon_exhausted);
    within += action_gap(env, r.final_action) <= bound;
    EXPECT_EQ(ledger.checkpoints().back().t, horizon);
  }
  EXPECT_GE(within, 29);
}

TEST(Run, SingleGroupIsOneSortThenCommit) {
  const Environment env(bernoullis({0.2, 0.8, 0.5}), RewardFunction::kNormalizedSum, 2);
  const std::uint64_t horizon = 500'000;
  RegretLedger a(horizon, 0.65, 20'000);
  RegretLedger b(horizon, 0.65, 20'000);
  Rng rng_a(9);
  Rng rng_b(9);
  const CmabSmResult r = run_cmab_sm(env, a, rng_a);
  const std::vector<ArmIndex> members = {0, 1, 2};
  const SortResult s = sort_group(members, env, r.lambda, start(env, horizon), b, rng_b);
  EXPECT_EQ(r.final_action, s.best);
  EXPECT_EQ(r.exploration_pulls, b.total_pulls());
}

TEST(Run, ShortHorizonCommitsToCurrentEstimate) {
  const Environment env(bernoullis({0.5, 0.1, 0.9, 0.3, 0.7, 0.6, 0.2}), RewardFunction::kMax, 3);
  RegretLedger ledger(1000, best_action_exact(env).mean, 300);
  Rng rng(4);
  const CmabSmResult r = run_cmab_sm(env, ledger, rng, {.lambda_override = 0.05});
  EXPECT_TRUE(r.horizon_exhausted);
  EXPECT_EQ(ledger.total_pulls(), 1000u);
  EXPECT_EQ(r.final_action.size(), 3u);
  EXPECT_EQ(ledger.checkpoints().back().t, 1000u);
}

TEST(Run, SingleArmSlates) {
  const Environment env(bernoullis({0.2, 0.9, 0.4, 0.6}), RewardFunction::kNormalizedSum, 1);
  RegretLedger ledger(1'000'000, 0.9, 20'000);
  Rng rng(6);
  const CmabSmResult r = run_cmab_sm(env, ledger, rng, {.lambda_override = 0.02});
  EXPECT_EQ(r.final_action, Action({1}, 4));
  EXPECT_EQ(ledger.total_pulls(), 1'000'000u);
}

TEST(RunProperty, StorageAndExplorationBounds) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(0.02, 0.98);
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t k = 1 + trial % 5;
    const std::size_t n = k + 1 + (trial * 5) % 13;
    std::vector<double> ps(n);
    for (auto& p : ps) p = u(gen);
    const auto fn = static_cast<RewardFunction>(trial % 3);
    const Environment env(bernoullis(ps), fn, k);
    const std::uint64_t horizon = 200'000;
    RegretLedger ledger(horizon, best_action_exact(env).mean, 20'000);
    Rng rng(trial);
    const CmabSmResult r = run_cmab_sm(env, ledger, rng);
    EXPECT_LE(r.peak_live_estimators, k + 2);
    EXPECT_LE(r.peak_live_estimators, n + k);
    EXPECT_EQ(ledger.total_pulls(), horizon);
    if (!r.horizon_exhausted) {
      const double logterm = std::log(2.0 * n * static_cast<double>(horizon));
      EXPECT_LE(static_cast<double>(r.exploration_pulls), 128.0 * n * logterm / (r.lambda * r.lambda));
    }
  }
}

}  // namespace
}  // namespace cmabsm
