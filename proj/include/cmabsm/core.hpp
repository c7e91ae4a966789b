#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cmabsm/action.hpp"
#include "cmabsm/env.hpp"
#include "cmabsm/rng.hpp"

namespace cmabsm {

// Separation threshold: (256 U^2 N ln(2NT) / T)^(1/3), natural log.
double compute_lambda(std::size_t n_arms, std::uint64_t horizon, double lipschitz);

// Which per-round pull target to use.
//   kTwoLogTNK: n_r = ceil(2 ln(T N K) / delta_r^2)   (default)
//   kLog2NT:    n_r = ceil(ln(2 N T) / delta_r^2)      (ablation)
enum class PullTargetFormula { kTwoLogTNK, kLog2NT };

struct RoundSchedule {
  int r = 0;
  double delta = 1.0;  // 2^-r
  std::uint64_t n_r = 0;
  std::uint64_t horizon = 0;
  std::size_t n_arms = 0;
  std::size_t slate_size = 0;
  PullTargetFormula formula = PullTargetFormula::kTwoLogTNK;

  // r = 0 schedule; callers advance once before the first round is played.
  static RoundSchedule initial(std::uint64_t horizon, std::size_t n_arms, std::size_t slate_size,
                               PullTargetFormula formula = PullTargetFormula::kTwoLogTNK);
};

std::uint64_t pull_target(const RoundSchedule& s, double delta);

RoundSchedule update_round(const RoundSchedule& s);

// Live-instance accounting for MeanEstimator, per thread. A run executes on a
// single thread, so the peak observed during a run is that run's footprint.
struct EstimatorProbe {
  static std::size_t live() noexcept;
  static std::size_t peak() noexcept;
  static void reset_peak() noexcept;  // peak := live
};

// Running average of an action's observed rewards.
class MeanEstimator {
 public:
  MeanEstimator() noexcept;
  MeanEstimator(const MeanEstimator& other) noexcept;
  MeanEstimator& operator=(const MeanEstimator& other) noexcept = default;
  ~MeanEstimator();

  double mean() const noexcept { return pulls_ ? sum_ / static_cast<double>(pulls_) : 0.0; }
  std::uint64_t pulls() const noexcept { return pulls_; }

  void add(double reward) noexcept {
    sum_ += reward;
    ++pulls_;
  }

 private:
  double sum_ = 0.0;
  std::uint64_t pulls_ = 0;
};

struct Checkpoint {
  std::uint64_t t;
  double cum_regret;
};

// Pseudo-regret accumulator: every pull of action a adds mu(a*) - mu(a).
class RegretLedger {
 public:
  RegretLedger(std::uint64_t horizon, double optimal_mean, std::uint64_t checkpoint_interval);

  std::uint64_t horizon() const noexcept { return horizon_; }
  double optimal_mean() const noexcept { return optimal_mean_; }
  std::uint64_t checkpoint_interval() const noexcept { return interval_; }
  std::uint64_t total_pulls() const noexcept { return total_pulls_; }
  std::uint64_t remaining() const noexcept { return horizon_ - total_pulls_; }
  bool exhausted() const noexcept { return total_pulls_ >= horizon_; }
  double cum_regret() const noexcept { return cum_regret_; }
  const std::vector<Checkpoint>& checkpoints() const noexcept { return checkpoints_; }

  // Credits `count` pulls each with gap `gap` (clamped to >= 0). Returns the
  // number actually credited, which is smaller when the horizon is reached.
  std::uint64_t credit(double gap, std::uint64_t count);

  // Appends a checkpoint at total_pulls when it is not on the interval grid.
  void finalize();

 private:
  std::uint64_t horizon_;
  double optimal_mean_;
  std::uint64_t interval_;
  std::uint64_t total_pulls_ = 0;
  double cum_regret_ = 0.0;
  std::vector<Checkpoint> checkpoints_;
};

enum class PullStatus { kComplete, kHorizonExhausted };

// Plays `action` until `est` has `target_pulls` observations, crediting each
// pull to the ledger. Stops early, returning kHorizonExhausted, when the
// ledger's horizon is reached.
PullStatus update_mean(MeanEstimator& est, const Action& action, const Environment& env,
                       std::uint64_t target_pulls, Rng& rng, RegretLedger& ledger);

// Same, with the action's gap precomputed by the caller.
PullStatus update_mean(MeanEstimator& est, const Action& action, const Environment& env,
                       std::uint64_t target_pulls, Rng& rng, RegretLedger& ledger, double gap);

}  // namespace cmabsm
