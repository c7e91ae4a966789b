#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cmabsm/action.hpp"
#include "cmabsm/rng.hpp"

namespace cmabsm {

struct Bernoulli {
  double p;
};

// (2/pi) * atan(Y) with Y ~ Exponential(mean = theta). Larger theta dominates.
struct TransformedExponential {
  double theta;
};

enum class Family { kBernoulli, kTransformedExponential };

class ArmDistribution {
 public:
  static ArmDistribution bernoulli(double p);
  static ArmDistribution transformed_exponential(double theta);

  Family family() const noexcept;
  double parameter() const noexcept;
  const std::variant<Bernoulli, TransformedExponential>& law() const noexcept { return law_; }

  double sample(Rng& rng) const;

  // P(X >= x).
  double survival(double x) const noexcept;

  double mean() const noexcept { return mean_; }
  double second_moment() const noexcept { return second_moment_; }

  std::string to_string() const;

 private:
  explicit ArmDistribution(std::variant<Bernoulli, TransformedExponential> law);

  std::variant<Bernoulli, TransformedExponential> law_;
  double mean_ = 0.0;
  double second_moment_ = 0.0;
};

// Maps an underlying exponential draw onto [0, 1).
double arctan_transform(double y) noexcept;

enum class RewardFunction { kNormalizedSum, kMax, kPairwisePosProduct };

std::string_view to_string(RewardFunction fn) noexcept;
std::string_view to_string(Family family) noexcept;

// Symmetric aggregate of K per-arm rewards in [0, 1]. The result is
// bit-identical under any permutation of `rewards`. Throws DimensionMismatch
// when rewards.size() != slate_size.
double aggregate(RewardFunction fn, std::span<const double> rewards, std::size_t slate_size);

// Closed form (or quadrature for the transformed-exponential family) of
// E[f(X_1..X_K)] for independent arms. Needs no Environment, so callers may
// evaluate multisets with repeated laws.
double exact_mean(RewardFunction fn, std::span<const ArmDistribution> arms);

struct FsdViolation {
  ArmIndex first;
  ArmIndex second;
  double x;  // grid point witnessing the failure
};

struct FsdReport {
  std::vector<ArmIndex> order;  // descending dominance, empty on violation
  std::optional<FsdViolation> violation;

  bool ok() const noexcept { return !violation.has_value(); }
};

inline constexpr std::size_t kDefaultFsdGridPoints = 1001;

// N arms of one family plus the aggregate reward; immutable after construction.
class Environment {
 public:
  // Rejects mixed families, repeated parameters, and K outside [1, N].
  Environment(std::vector<ArmDistribution> arms, RewardFunction reward_fn, std::size_t slate_size);

  std::size_t n_arms() const noexcept { return arms_.size(); }
  std::size_t slate_size() const noexcept { return slate_size_; }
  RewardFunction reward_fn() const noexcept { return reward_fn_; }
  Family family() const noexcept { return arms_.front().family(); }
  std::span<const ArmDistribution> arms() const noexcept { return arms_; }
  const ArmDistribution& arm(ArmIndex i) const { return arms_.at(i); }

  // One bandit-feedback observation; per-arm draws never leave this call.
  double sample_action_reward(const Action& action, Rng& rng) const;

  double exact_action_mean(const Action& action) const;

  // Same as above for a row of K arm indices (no canonical-order requirement).
  double sample_action_reward(std::span<const ArmIndex> arms, Rng& rng) const;
  double exact_action_mean(std::span<const ArmIndex> arms) const;

  // Pairwise survival comparison on `grid_points` evenly spaced points of (0,1).
  FsdReport verify_fsd_ordering(std::size_t grid_points = kDefaultFsdGridPoints) const;

  // Top-K arms by parameter. Under the monotone reward functions this is the
  // optimal action, which lets the ledger avoid enumerating C(N, K) actions.
  Action dominance_optimal_action() const;

 private:
  void check_arms(std::span<const ArmIndex> arms) const;

  std::vector<ArmDistribution> arms_;
  RewardFunction reward_fn_;
  std::size_t slate_size_;
};

}  // namespace cmabsm
